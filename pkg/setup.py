"""
Setup script for the p-minimal surface laboratory
"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="pminimal",
    version="1.0.0",
    description="Numerical laboratory for p-minimal surfaces, tubes and graphs",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["pminimal", "pminimal.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.11.4",
        "sympy>=1.12",
        "pydantic>=2.5,<3",
        "pydantic-settings>=2.1",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.0",
            "pytest-cov>=4.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "pminimal=pminimal.cli:main",
        ],
    },
)
