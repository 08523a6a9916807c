# -*- coding: utf-8 -*-
#
# sorpy documentation build configuration file.
#
# This file is execfile()d with the current directory set to its containing dir.
#
# All configuration values have a default; values that are commented out
# serve to show the default.

import sys, os

# the package root, so autodoc finds sorpy and examples.py
sys.path.insert(0, os.path.abspath('..'))

# -- General configuration -----------------------------------------------------

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest', 'sphinx.ext.todo', 'sphinx.ext.coverage']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'sorpy'
copyright = u'2026, sorpy developers'

# The short X.Y version.
version = '0.1'
# The full version, including alpha/beta/rc tags.
release = '0.1.0'

exclude_patterns = ['_build']
pygments_style = 'sphinx'

# -- Options for HTML output ---------------------------------------------------

html_theme = 'alabaster'
htmlhelp_basename = 'sorpydoc'

# -- Options for LaTeX output --------------------------------------------------

latex_elements = {
}

latex_documents = [
  ('index', 'sorpy.tex', u'sorpy Documentation', u'sorpy developers', 'manual'),
]

# -- Options for manual page output --------------------------------------------

man_pages = [
    ('index', 'sorpy', u'sorpy Documentation', [u'sorpy developers'], 1)
]

# -- Options for Texinfo output ------------------------------------------------

texinfo_documents = [
  ('index', 'sorpy', u'sorpy Documentation', u'sorpy developers', 'sorpy',
   'Marginal models for longitudinal data from biased sampling designs.', 'Miscellaneous'),
]
