"""Pick the search kernel at import: compiled extension if built, else pure Python.

Set ``COMPOSEDC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _bnb_py

KERNEL = "python"
search = _bnb_py.search
python_search = _bnb_py.search
compiled_search = None

try:
    from . import _bnb_ext
except ImportError:  # extension not built
    _bnb_ext = None
else:
    compiled_search = _bnb_ext.search
    if not os.environ.get("COMPOSEDC_PURE_PYTHON"):
        search = compiled_search
        KERNEL = "cython"


def get_search(name: str | None = None):
    """Search function by name (``"python"``, ``"cython"``) or the import-time default."""
    if name is None:
        return search
    if name == "python":
        return python_search
    if name == "cython":
        if compiled_search is None:
            raise RuntimeError("compiled kernel is not built; run `pip install -e . --no-build-isolation`")
        return compiled_search
    raise ValueError(f"unknown kernel {name!r}")
