# Sphinx configuration for the OCRRevise documentation.
# Options: https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

# autodoc imports the package from the repository root
sys.path.insert(0, os.path.abspath('../../'))

# -- Project information -----------------------------------------------------

project = 'OCRRevise'
copyright = '2026, OCRRevise developers'
author = 'OCRRevise developers'
version = '0.1'
release = '0.1.0'

# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.napoleon',
]

# docstrings follow the Google style
napoleon_google_docstring = True
napoleon_numpy_docstring = False

autodoc_member_order = 'bysource'
autodoc_default_options = {
    'members': True,
    'undoc-members': False,
    'show-inheritance': True,
}
autodoc_mock_imports = ['Levenshtein']

source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = ['_build']

# -- Options for HTML output -------------------------------------------------

html_theme = 'alabaster'
html_theme_options = {
    'description': 'Synthetic OCR error corpora, post-OCR correction and evaluation',
    'fixed_sidebar': True,
}
