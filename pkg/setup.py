from setuptools import setup, find_packages

setup(
    name='nnstabz',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'tests.*']),
    install_requires=[
        'numpy',
        'scipy>=1.9',
        'pandas',
        'mpire',
        'halo',
        'rich',
        'pyfiglet',
        'colorama',
        'emoji',
        'argparse',
    ],
    extras_require={
        'tests': ['pytest'],
    },

    entry_points={
        'console_scripts': [
            'nnstabz=nnstabz.nnstabz:main'
        ]
    },
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Operating System :: OS Independent',
    ],
    description='Bounds and reproducible Monte Carlo estimates of nearest-neighbor instability in high dimensions.',
    long_description='''NNSTABZ, short for Nearest-Neighbor STABility, evaluates when nearest-neighbor
                      queries stop being meaningful as the dimension grows: closed-form concentration
                      bounds on the instability probability, the E[Z] and stable-volume bounds of the
                      exponential dataset-size regime, and seeded Monte Carlo estimators that check them.''',
    keywords='nearest neighbor, curse of dimensionality, concentration inequalities, monte carlo',
    python_requires='>=3.8',
)
