from . import nnstabz
from . import bounds
from . import check_suite
from . import constants
from . import display
from . import distributions
from . import experiments
from . import file_utilities
from . import input_validation
from . import metric
from . import montecarlo
from . import resources
from .nnstabz import run
