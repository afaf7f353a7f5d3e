"""Setup script for cpml."""

from setuptools import setup, find_packages
from cpml import __version__

setup(
    name="cpml",
    version=__version__,
    description="Predict COPD from respiratory clinical notes and vital signs",
    author="David Parker",
    author_email="davidparkercodes@example.com",
    url="https://github.com/davidparkercodes/cpml",
    packages=find_packages(exclude=["tests", "tests.*"]),
    entry_points={
        "console_scripts": [
            "cpml=cpml.main:main",
        ],
    },
    install_requires=[
        "numpy>=1.20.0",
        "scipy>=1.7.0",
        "pandas>=1.3.0",
        "PyYAML>=6.0",
    ],
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
)
