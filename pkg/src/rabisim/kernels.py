"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
reference kernels are used.  Both backends stay importable so they can be
compared (see ``benchmarks/bench_kernels.py``).
"""
from . import _pykernels as python

try:
    from . import _ckernels as compiled
except ImportError:  # extension not built
    compiled = None

_active = compiled if compiled is not None else python


def get(name=None):
    """Return a kernel module: the active one, or ``"python"`` / ``"compiled"`` explicitly."""
    if name is None:
        return _active
    if name == "python":
        return python
    if name == "compiled":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def active_backend() -> str:
    return _active.BACKEND
