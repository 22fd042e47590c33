import os
import sys
from typing import List

# Sphinx configuration for the coopnav documentation.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

sys.path.insert(0, os.path.abspath(".."))

project = "coopnav"
copyright = "2026, coopnav contributors"
author = "coopnav contributors"

release = "0.1.0"
version = ".".join(release.split(".")[:2])

extensions = [
    "sphinx.ext.autodoc",
    "sphinx_autodoc_typehints",
    "sphinx.ext.viewcode",
    "sphinx.ext.mathjax",
    "sphinx.ext.intersphinx",
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable", None),
    "scipy": ("https://docs.scipy.org/doc/scipy", None),
}

autodoc_member_order = "bysource"

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"
exclude_patterns: List[str] = ["_build", "Thumbs.db", ".DS_Store"]

pygments_style = "sphinx"

html_theme = "sphinx_rtd_theme"
htmlhelp_basename = "coopnavdoc"
