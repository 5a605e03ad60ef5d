from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="seasonal-aggregate",
    version="0.1.0",
    author="RagingTortoise",
    description="Spectral modelling, estimation and forecasting of aggregated seasonal long-memory series",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    python_requires=">=3.10",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    extras_require={
        "mcp": ["mcp>=1.0.0"],
        "test": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "seasonal-aggregate=seasonal_aggregate.cli:main",
        ],
    },
)
