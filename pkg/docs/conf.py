# Sphinx configuration for the fracmart API docs.
import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from fracmart import __version__  # noqa: E402

project = 'fracmart'
author = 'fracmart developers'
copyright = '2026, fracmart developers'
release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
]
autodoc_member_order = 'bysource'
autodoc_typehints = 'description'

templates_path = ['_templates']
exclude_patterns = ['_build']

html_theme = 'alabaster'
html_static_path = ['_static']
