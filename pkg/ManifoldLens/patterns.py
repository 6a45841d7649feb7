# patterns.py
# Copyright (c) 2026 ManifoldLens contributors
#
# Regex patterns used by the readers and the CLI.
"""Compiled regex patterns used throughout ManifoldLens."""


import re

# netpbm magic number at the very start of the file (P1..P7)
RE_PNM_MAGIC = re.compile(rb'^P([1-7])')

# <stem>_<k1>[_<k2>_<k3>]  (derivative image naming)
RE_DERIVATIVE_NAME = re.compile(
    r'^(?P<stem>.+?)'                       # original image stem
    r'_(?P<ks>\d+(?:_\d+){0,2})$'           # one k per channel
)

# Matrix literal on the command line: "2,0;0,3" (or "2 0; 0 3")
RE_MATRIX_ROW_SEP = re.compile(r'\s*;\s*')
RE_MATRIX_COL_SEP = re.compile(r'\s*,\s*|\s+')

# <name>.meta.json sidecar
RE_META_SUFFIX = re.compile(r'\.meta\.json$', re.IGNORECASE)
