# -*- coding: utf-8 -*-
import os
from setuptools import setup, find_packages  # type: ignore

with open("README.md", encoding="utf-8") as f:
    long_description = f.read()

packages = find_packages(exclude=["utest", "atest"])

install_requires = open(os.path.join("StochasticVlasov", "requirements.txt")).readlines()

setup_kwargs = {
    "name": "robotframework-stochasticvlasov",
    "version": "0.4.0",
    "description": "Robot Framework library for particle experiments with the stochastic Vlasov equation under transport noise.",
    "long_description": long_description,
    "long_description_content_type": "text/markdown",
    "author": "MarketSquare - Robot Framework community",
    "maintainer": None,
    "maintainer_email": None,
    "packages": packages,
    "install_requires": install_requires,
    "entry_points": {"console_scripts": ["stochvlasov=StochasticVlasov.entry:main"]},
    "python_requires": ">=3.8,<4.0",
    "classifiers": [
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Physics",
        "Framework :: Robot Framework",
        "Framework :: Robot Framework :: Library",
    ],
    "include_package_data": True,
}


setup(**setup_kwargs)
