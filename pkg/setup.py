from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="ManifoldLens",
    version="0.1.0",
    author="ManifoldLens contributors",
    description="Local intrinsic dimension and Riemann curvature of activation manifolds, with SVD image augmentation",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=("tests",)),
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "click>=8.0",
    ],
    classifiers=[
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.12",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
        "Intended Audience :: Science/Research",
    ],
    python_requires=">=3.12",
    entry_points={
        "console_scripts": [
            "manifold-lens=ManifoldLens.main:main",
        ],
    },
)
