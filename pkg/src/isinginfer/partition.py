"""Log-partition function: exact enumeration and three bounds.

``F(beta) = log E_0 exp(beta H(sigma) / 2)`` where ``E_0`` is the uniform
measure on ``{-1, 1}^n``.  For non-negative couplings

    sum_{i<j} log cosh(beta J_ij)  <=  F(beta)  <=  -1/2 sum_i log(1 - beta lambda_i)

(the upper bound needs ``beta lambda_max < 1``), and for any coupling the
mean-field objective ``beta/2 z'Jz - sum_i I(z_i)`` evaluated at any
``z in [-1, 1]^n`` is a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import logsumexp, xlog1py

from .coupling import CouplingMatrix, Spectrum, spectrum as _spectrum
from .errors import DomainError, InvalidParameterError
from .gibbs import EXACT_MAX_N, all_hamiltonians
from .validation import check_beta, check_coupling

MF_GRID = 10_000
MF_TOL = 1e-12
MF_MAX_SWEEPS = 10_000


def exact_log_partition(cmat: CouplingMatrix, beta: float) -> float:
    """``F(beta)`` by max-shifted log-sum-exp over all ``2^n`` states (n <= 20)."""
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    if beta == 0:
        return 0.0
    h = all_hamiltonians(cmat)
    return float(logsumexp(0.5 * beta * h) - cmat.n * math.log(2.0))


def gaussian_upper_bound(spec, beta: float) -> float:
    """``-1/2 sum_i log(1 - beta lambda_i)`` over the full spectrum.

    ``spec`` is a :class:`Spectrum` or a coupling matrix (which must then be
    non-negative).  Raises :class:`DomainError` when ``beta >= 1/lambda_max``.
    """
    beta = check_beta(beta)
    if not isinstance(spec, Spectrum):
        cmat = check_coupling(spec)
        if not cmat.nonnegative:
            raise InvalidParameterError("the Gaussian upper bound needs non-negative couplings")
        spec = _spectrum(cmat)
    if spec.partial:
        raise DomainError("the Gaussian upper bound needs the full spectrum, not a partial one")
    lam = np.asarray(spec.eigenvalues, dtype=float)
    top = float(lam.max()) if lam.size else 0.0
    if beta * top >= 1:
        raise DomainError(
            f"Gaussian upper bound requires beta < 1/lambda_max = {1.0 / top:.12g}, got beta={beta}"
        )
    return float(-0.5 * np.sum(np.log1p(-beta * lam)))


def _logcosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def rademacher_lower_bound(cmat: CouplingMatrix, beta: float) -> float:
    """``sum_{i<j} log cosh(beta J_ij)``, iterating only over non-zero entries."""
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    if not cmat.nonnegative:
        raise InvalidParameterError("the pairwise lower bound needs non-negative couplings")
    _, _, w = cmat.upper_entries()
    return float(np.sum(_logcosh(beta * w)))


def entropy_penalty(x):
    """``I(x) = ((1+x) log(1+x) + (1-x) log(1-x)) / 2``; ``I(+-1) = log 2``."""
    x = np.asarray(x, dtype=float)
    # log1p keeps I(x) ~ x^2/2 accurate near 0; xlog1py gives 0 * log 0 = 0 at the ends
    return 0.5 * (xlog1py(1 + x, x) + xlog1py(1 - x, -x))


def mean_field_objective(cmat: CouplingMatrix, beta: float, z) -> float:
    z = np.asarray(z, dtype=float)
    return float(0.5 * beta * z @ cmat.matvec(z) - np.sum(entropy_penalty(z)))


def _constant_scan(cmat: CouplingMatrix, beta: float):
    """Best constant vector ``(m, ..., m)``: returns ``(value, m)``."""
    n, total = cmat.n, cmat.total

    def g(local):
        return 0.5 * beta * local * local * total - n * float(entropy_penalty(local))

    # g is even in m
    grid = np.linspace(0.0, 1.0, MF_GRID)
    vals = 0.5 * beta * grid ** 2 * total - n * entropy_penalty(grid)
    k = int(np.argmax(vals))
    best_m, best = float(grid[k]), float(vals[k])
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, MF_GRID - 1)]
    if hi > lo:
        res = minimize_scalar(lambda local: -g(local), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14})
        if res.success and -res.fun > best:
            best_m, best = float(res.x), float(-res.fun)
    return max(best, 0.0), best_m


def _coordinate_ascent(cmat: CouplingMatrix, beta: float, z0):
    z = np.clip(np.asarray(z0, dtype=float).copy(), -1.0, 1.0)
    csr = cmat.csr
    indptr, indices, data = csr.indptr, csr.indices, csr.data
    field = cmat.matvec(z)
    value = mean_field_objective(cmat, beta, z)
    for _ in range(MF_MAX_SWEEPS):
        for i in range(cmat.n):
            # objective is concave in z_i alone; its maximizer is tanh(beta * field_i)
            new = math.tanh(beta * field[i])
            dz = new - z[i]
            if dz != 0.0:
                sl = slice(indptr[i], indptr[i + 1])
                field[indices[sl]] += dz * data[sl]
                z[i] = new
        new_value = mean_field_objective(cmat, beta, z)
        if new_value - value < MF_TOL:
            value = max(value, new_value)
            break
        value = new_value
    return value, z


def mean_field_lower_bound(cmat: CouplingMatrix, beta: float, mode: str = "coordinate_ascent",
                           start=None) -> float:
    """Mean-field lower bound on ``F(beta)``.

    ``constant_scan`` maximizes ``(beta/2) m^2 (1'J1) - n I(m)`` over a grid
    of 10^4 points on ``[0, 1]`` (the objective is even) refined by a bounded
    scalar search.  ``coordinate_ascent`` maximizes the full objective over
    ``z`` by exact coordinate updates ``z_i = tanh(beta (Jz)_i)``, starting
    from ``start`` (default: the best constant vector, or 0.5 if that is 0),
    and returns the larger of its value and the constant-scan value.  Every
    feasible ``z`` gives a valid bound, so stopping early never invalidates it.
    """
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    if beta == 0:
        return 0.0
    const_value, m_star = _constant_scan(cmat, beta)
    if mode == "constant_scan":
        return const_value
    if mode != "coordinate_ascent":
        raise InvalidParameterError(f"unknown mean-field mode {mode!r}")
    if start is None:
        start = np.full(cmat.n, m_star if m_star > 0 else 0.5)
    value, _ = _coordinate_ascent(cmat, beta, start)
    return max(value, const_value)


@dataclass(frozen=True)
class PartitionReport:
    """Exact value (when enumerable) and bounds of ``F(beta)``.

    ``gaussian_upper`` is ``None`` outside ``beta lambda_max < 1`` or for
    couplings with negative entries; ``exact`` is ``None`` above 20 spins.
    """

    beta: float
    exact: float | None
    gaussian_upper: float | None
    rademacher_lower: float
    mean_field_lower: float

    def sandwich_ok(self, slack: float = 1e-9) -> bool:
        if self.exact is None:
            return True
        ok = self.rademacher_lower <= self.exact + slack and self.mean_field_lower <= self.exact + slack
        if self.gaussian_upper is not None:
            ok = ok and self.exact <= self.gaussian_upper + slack
        return ok


def partition_report(cmat: CouplingMatrix, beta: float, spec: Spectrum | None = None) -> PartitionReport:
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    exact = exact_log_partition(cmat, beta) if cmat.n <= EXACT_MAX_N else None
    nonneg = cmat.nonnegative
    upper = None
    if nonneg:
        spec = spec or _spectrum(cmat)
        try:
            upper = gaussian_upper_bound(spec, beta)
        except DomainError:
            upper = None
    lower = rademacher_lower_bound(cmat, beta) if nonneg else math.nan
    return PartitionReport(beta, exact, upper, lower, mean_field_lower_bound(cmat, beta))
