import os
import sys

sys.path.insert(0, os.path.abspath('..'))

from semrate import __version__  # noqa: E402

project = 'semrate'
version = release = __version__

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]
autodoc_member_order = 'bysource'
napoleon_google_docstring = True

templates_path = []
exclude_patterns = ['_build']
html_theme = 'alabaster'
