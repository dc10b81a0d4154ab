"""Setup script for gsqg-saddle-lab"""
from setuptools import setup, find_packages

setup(
    name="gsqg-saddle-lab",
    version="0.1.0",
    description="Numerical lab for hyperbolic-saddle blow-up estimates of the generalized SQG equation",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_dir={"": "."},
    install_requires=[
        "pydantic>=2.0.0",
        "pydantic-settings>=2.0.0",
        "python-dotenv>=1.0.0",
        "aiofiles>=23.2.0",
        "tenacity>=8.2.0",
        "pyyaml>=6.0",
        "path>=16.0.0,<17",
        "numpy>=1.26",
        "scipy>=1.11",
        "contourpy>=1.2",
        "matplotlib>=3.8",
    ],
    extras_require={
        "test": ["mpmath>=1.3"],
    },
    python_requires=">=3.10",
)
