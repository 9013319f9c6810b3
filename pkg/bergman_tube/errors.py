"""
Centralized exception types for the toolkit.

Use `exit_code_for` at the CLI boundary instead of checking class names, so the
mapping from failure kind to exit status lives in one place.
"""

from __future__ import annotations

from typing import Optional


class BergmanTubeError(Exception):
    """Base class for every error raised by bergman_tube."""


class DimensionMismatchError(BergmanTubeError, ValueError):
    """Raised when two points (or a point and a parameter set) disagree on n."""


class BoundaryPointError(BergmanTubeError, ValueError):
    """Raised when an operation that needs an interior point receives rho(z) <= 0."""


class BranchCutError(BergmanTubeError, ArithmeticError):
    """Raised when Re rho(z, w) <= 0 would leave the principal branch."""


class DivergentRegimeError(BergmanTubeError, ValueError):
    """Raised when the requested integral is known to be infinite."""


class HypothesisError(BergmanTubeError, ValueError):
    """Raised when parameters violate the hypotheses of the requested check."""


class RegimeError(HypothesisError):
    """Raised when exponents fall outside the regime an operation covers (e.g. p1 <= p2)."""


class IntegrandError(BergmanTubeError, ArithmeticError):
    """Raised when an integrand returns non-finite values at sampled points."""


class MeasureLoadError(BergmanTubeError, RuntimeError):
    """Raised when a measure file or density registry entry cannot be loaded or validated."""


class CatalogError(BergmanTubeError):
    """Raised when a YAML catalogue (checks, densities) is invalid."""


def exit_code_for(exc: BaseException) -> Optional[int]:
    """
    Return the CLI exit code for a known failure, or None to let it propagate.

    2 covers usage-like failures: bad input files, parameter regimes and
    hypotheses, non-interior points. Numerical faults (IntegrandError,
    BranchCutError) are bugs or bad integrands and are not mapped.
    """
    if isinstance(exc, (DivergentRegimeError, HypothesisError, MeasureLoadError, CatalogError)):
        return 2
    if isinstance(exc, (DimensionMismatchError, BoundaryPointError)):
        return 2
    return None
