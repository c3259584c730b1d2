from setuptools import setup, find_packages


def read_version():
    with open("fracmart/__init__.py") as f:
        for line in f:
            if line.startswith("__version__"):
                return line.split("=")[1].strip().strip('"')
    raise RuntimeError("fracmart/__init__.py has no __version__")


setup(
    name="fracmart",
    version=read_version(),
    packages=find_packages(exclude=["tests*"]),
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "pydantic>=2",
        "termcolor",
        "python-dotenv",
        "pytest",
    ],
    entry_points={
        "console_scripts": [
            "fracmart=fracmart.cli:main",
        ],
    },
    description="Deviation bounds for fractional martingales, checked by Monte Carlo.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
    ],
    python_requires=">=3.10",
)
