"""Kernel backend selection.

The compiled extension and the pure-Python module implement the same
functions over the same state layout and produce bit-identical results.
CECLUSTER_BACKEND=c demands the extension, =python forces the fallback,
unset prefers the extension when it is importable and complete.
"""

import os


def get_kernel():
    choice = os.environ.get("CECLUSTER_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "c", "python"):
        raise ValueError(f"unknown backend {choice!r}; expected c, python, or auto")
    if choice in ("auto", "c"):
        try:
            from . import _kernel

            if hasattr(_kernel, "hartigan_sweep"):
                return _kernel
        except ImportError:
            pass
        if choice == "c":
            raise RuntimeError("compiled kernel requested via CECLUSTER_BACKEND=c but not built")
    from . import _kernel_py

    return _kernel_py


def backend_name() -> str:
    return "c" if get_kernel().__name__.endswith("._kernel") else "python"
