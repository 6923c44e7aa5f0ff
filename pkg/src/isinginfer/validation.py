"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numbers

import numpy as np

from .coupling import CouplingMatrix
from .errors import DimensionMismatchError, InvalidParameterError


def check_coupling(cmat) -> CouplingMatrix:
    """Accept a :class:`CouplingMatrix` or anything convertible to one."""
    if isinstance(cmat, CouplingMatrix):
        return cmat
    return CouplingMatrix(cmat, kind="custom")


def check_spins(tau, n: int | None = None, *, allow_2d: bool = False) -> np.ndarray:
    """Validate a +-1 configuration (or a stack of them when ``allow_2d``).

    Returns an ``int8`` array.  Raises on non-+-1 entries or a length that
    does not match ``n``.
    """
    arr = np.asarray(tau)
    if arr.ndim not in ((1, 2) if allow_2d else (1,)):
        raise DimensionMismatchError(f"spin configuration has invalid shape {arr.shape}")
    if arr.size and not np.all((arr == 1) | (arr == -1)):
        raise InvalidParameterError("spin entries must be exactly -1 or +1")
    if n is not None and arr.shape[-1] != n:
        raise DimensionMismatchError(f"configuration length {arr.shape[-1]} != coupling size {n}")
    return arr.astype(np.int8, copy=False)


def check_beta(beta, name="beta", allow_inf=False) -> float:
    if not isinstance(beta, numbers.Real):
        raise InvalidParameterError(f"{name} must be a real number")
    beta = float(beta)
    if np.isnan(beta) or beta < 0 or (np.isinf(beta) and not allow_inf):
        raise InvalidParameterError(f"{name} must be a non-negative real, got {beta}")
    return beta


def check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def check_count(count, name="count", minimum=1) -> int:
    if isinstance(count, bool) or not isinstance(count, numbers.Integral) and not (
            isinstance(count, float) and count.is_integer()):
        raise InvalidParameterError(f"{name} must be an integer")
    count = int(count)
    if count < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {count}")
    return count
