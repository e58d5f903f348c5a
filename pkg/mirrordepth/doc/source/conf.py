# -*- coding: utf-8 -*-
#
# mirrordepth documentation build configuration file.

import sys, os

# Documented modules are imported from the source tree.
sys.path.insert(0, os.path.abspath(os.path.join('..', '..', '..')))

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.doctest',
              'sphinx.ext.intersphinx', 'sphinx.ext.mathjax',
              'sphinx.ext.viewcode']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'mirrordepth'
copyright = u'2026, the mirrordepth developers'

with open(os.path.join('..', '..', 'VERSION')) as f:
    release = f.read().strip()
version = '.'.join(release.split('.')[:2])

exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'default'
html_static_path = ['_static']
htmlhelp_basename = 'mirrordepthdoc'

latex_documents = [
  ('index', 'mirrordepth.tex', u'mirrordepth Documentation',
   u'mirrordepth developers', 'manual'),
]

man_pages = [
    ('index', 'mirrordepth', u'mirrordepth Documentation',
     [u'mirrordepth developers'], 1)
]

intersphinx_mapping = {'python': ('https://docs.python.org/3', None),
                       'numpy': ('https://numpy.org/doc/stable', None)}
