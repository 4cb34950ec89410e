#!/usr/bin/env python
import setuptools

version = None

with open("decoykit/__init__.py") as fh:
    for line in fh:
        if line.startswith("__version__"):
            version = line.strip().split()[-1][1:-1]
            break
    if not version:
        raise RuntimeError("Could not determine version")


def load_readme():
    with open("README.md") as f:
        return f.read()


setuptools.setup(
    name="decoykit",
    version=version,
    license="MIT",
    description="Decoy-tolerant ciphers, chaffing and winnowing, and equivocation tools",
    long_description_content_type="text/markdown",
    long_description=load_readme(),
    packages=setuptools.find_packages(include=["decoykit", "decoykit.*"]),
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 4 - Beta",
        "Programming Language :: Python :: 3",
        "Topic :: Security :: Cryptography",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    install_requires=[
        "numpy>=1.17",  # PCG64 generator, vectorized bit arithmetic
        "scipy>=1.4",  # erfc / gammaincc for the test battery
    ],
    entry_points={
        "console_scripts": ["decoykit=decoykit.cli:main"],
    },
    extras_require={
        "test": [
            "pytest",  # Test runner
            "pytest-xdist",  # Parallel tests: `pytest -n <num-workers>`
            "pytest-cov",  # Code coverage
        ],
        "docs": [
            "sphinx",
        ],
    },
)
