from setuptools import setup, find_packages

setup(
    name='noisy_bisbm',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),

    install_requires=[
        'numpy>=1.20.0',
        'scipy>=1.7.1',
        'pandas>=1.5.0',
        'pathos>=0.2.8',
        'scikit-learn>=1.2.0',
    ],

    extras_require={
        'tests': ['pytest>=7.0'],
    },

    entry_points={
        'console_scripts': ['noisy-bisbm=noisy_bisbm.cli.main:main'],
    },
)
