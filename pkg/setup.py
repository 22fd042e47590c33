#!/usr/bin/env python

"""
coopnav - cooperative pedestrian localization
=============================================

**coopnav fuses foot-mounted inertial navigation from a team of walkers.**
Each foot runs a step-wise ZUPT-aided navigator, a fusion center ties the
feet together with inter-foot constraints and peer-to-peer ranges, and a
simulation harness measures accuracy and communication cost.
"""

import os

from setuptools import find_packages, setup

here = os.path.abspath(os.path.dirname(__file__))


def get_file_text(file_name: str) -> str:
    with open(os.path.join(here, file_name)) as in_file:
        return in_file.read()


setup(
    name="coopnav",
    version="0.1.0",
    description="Cooperative localization of pedestrians with foot-mounted inertial sensors.",
    long_description=get_file_text("README.rst"),
    long_description_content_type="text/x-rst",
    packages=find_packages(exclude=("tests", "tests.*")),
    # PEP 561
    package_data={"coopnav": ["py.typed"]},
    zip_safe=False,
    license="Apache-2.0",
    python_requires=">=3.8",
    install_requires=[
        "parsimonious>=0.10.0",
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    entry_points={
        "console_scripts": ["coopnav=coopnav.cli:main"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering",
    ],
)
