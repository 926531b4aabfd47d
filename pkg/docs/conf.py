"""Sphinx configuration for the vc-gap-lab documentation."""

import sys
from pathlib import Path

SOURCE_DIR = Path(__file__).resolve().parents[1] / "src"
sys.path.insert(0, str(SOURCE_DIR))

from vc_gap_lab import __version__  # noqa: E402

project = "vc-gap-lab"
copyright = "2026, vc-gap-lab contributors"  # noqa: A001
author = "vc-gap-lab contributors"
version = ".".join(__version__.split(".")[:2])
release = __version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx.ext.intersphinx",
    "sphinx.ext.viewcode",
    "sphinx_autodoc_typehints",
]

exclude_patterns = ["_build"]

html_theme = "sphinx_rtd_theme"
html_title = f"vc-gap-lab {release}"
html_theme_options = {"navigation_depth": 2}

autodoc_member_order = "groupwise"
autodoc_typehints = "description"
autodoc_class_signature = "separated"
autodoc_default_options = {"exclude-members": "model_config, model_fields, model_computed_fields"}
typehints_use_rtype = False

napoleon_google_docstring = True
napoleon_numpy_docstring = False

# numpy.typing aliases do not resolve under intersphinx
nitpick_ignore = [
    ("py:class", "ArrayLike"),
    ("py:class", "numpy.typing.ArrayLike"),
    ("py:class", "np.ndarray"),
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
    "pydantic": ("https://docs.pydantic.dev/latest/", None),
}
