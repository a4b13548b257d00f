"""Cross-entropy clustering over Gaussian model families.

Minimizes the total per-cluster coding cost with a modified Hartigan
iteration that deletes clusters whose upkeep is no longer worth paying,
so the number of clusters is found, not fixed.
"""

from .linalg import Moments, merge, moments_of, subtract
from .models import Family, FamilySpec, cross_entropy, fitted_covariance, gaussian_density

__version__ = "0.1.0"

__all__ = [
    "Moments",
    "moments_of",
    "merge",
    "subtract",
    "Family",
    "FamilySpec",
    "cross_entropy",
    "fitted_covariance",
    "gaussian_density",
    "CecConfig",
    "CecResult",
    "run",
    "run_single",
    "classify",
    "mixture_density",
    "__version__",
]


def __getattr__(name):
    # engine pulls in the compiled kernel; keep base imports light and let
    # the heavy names resolve lazily.
    if name in {"CecConfig", "CecResult", "run", "run_single", "classify", "mixture_density"}:
        from . import engine

        return getattr(engine, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
