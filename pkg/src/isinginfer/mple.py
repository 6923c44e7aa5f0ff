"""Maximum pseudolikelihood estimation of the inverse temperature.

For a configuration ``sigma`` with local fields ``m_i = sum_j J(i,j) sigma_j``
the pseudolikelihood score is

    L(x) = (1/n) sum_i m_i (sigma_i - tanh(x m_i)),

a non-increasing function of ``x`` with ``L(inf) = (1/n) sum_i (m_i sigma_i - |m_i|)``.
The MPLE is the smallest non-negative root of ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .coupling import CouplingMatrix
from .validation import check_beta, check_coupling, check_spins

INTERIOR = "interior"
BOUNDARY_ZERO = "boundary_zero"
INFINITE = "infinite"
DEGENERATE = "degenerate"
STATUSES = (INTERIOR, BOUNDARY_ZERO, INFINITE, DEGENERATE)

DEFAULT_TOL = 1e-12
# |L(0)| below this fraction of mean|m_i| is roundoff from an energy that is exactly 0
ZERO_SCORE_RTOL = 1e-13


def local_fields(cmat: CouplingMatrix, sigma) -> np.ndarray:
    """``m = J sigma`` (row-wise for a stack of configurations)."""
    cmat = check_coupling(cmat)
    sigma = check_spins(sigma, cmat.n, allow_2d=True)
    return cmat.matvec(sigma.astype(float))


def _score_from_fields(local, sigma, x):
    # sigma_i - tanh(x m_i) = 2 sigma_i expit(-2 x sigma_i m_i): no cancellation near saturation
    a = local * sigma
    if math.isinf(x):
        return float(np.mean(a - np.abs(local)))
    return float(np.mean(2.0 * a * expit(-2.0 * x * a)))


def _derivative_from_fields(local, x):
    z = 2.0 * x * local
    # sech^2(x m) = 4 expit(2 x m) expit(-2 x m)
    return -float(np.mean(4.0 * local * local * expit(z) * expit(-z)))


def score(cmat: CouplingMatrix, sigma, x: float) -> float:
    """Pseudolikelihood score ``L_sigma(x)`` for ``x`` in ``[0, inf]``.

    A 2-D ``sigma`` gives the mean score over its rows.
    """
    x = check_beta(x, "x", allow_inf=True)
    sigma = check_spins(sigma, check_coupling(cmat).n, allow_2d=True)
    return _score_from_fields(local_fields(cmat, sigma), sigma, x)


def score_derivative(cmat: CouplingMatrix, sigma, x: float) -> float:
    """``L'_sigma(x) = -(1/n) sum_i m_i^2 sech^2(x m_i)``, always <= 0."""
    x = check_beta(x, "x")
    return _derivative_from_fields(local_fields(cmat, sigma), x)


@dataclass(frozen=True)
class MpleResult:
    """Outcome of :func:`mple`.

    ``beta_hat`` is ``0.0`` for ``boundary_zero``, ``inf`` for ``infinite``
    and ``nan`` for ``degenerate`` (all local fields vanish).  ``residual``
    is the score at ``beta_hat`` when it is finite.
    """

    beta_hat: float
    status: str
    residual: float
    iterations: int

    @property
    def is_interior(self) -> bool:
        return self.status == INTERIOR


def mple_from_fields(local: np.ndarray, sigma: np.ndarray) -> MpleResult:
    """Root-find on precomputed local fields; see :func:`mple`."""
    sigma = np.asarray(sigma, dtype=float)
    if not np.any(local):
        return MpleResult(math.nan, DEGENERATE, 0.0, 0)

    def score_at(x):
        return _score_from_fields(local, sigma, x)

    s0 = score_at(0.0)
    if s0 <= ZERO_SCORE_RTOL * float(np.mean(np.abs(local))):
        return MpleResult(0.0, BOUNDARY_ZERO, s0, 0)

    s_inf = score_at(math.inf)
    if s_inf >= 0:
        # every local field agrees in sign with its spin: L > 0 on [0, inf)
        return MpleResult(math.inf, INFINITE, s_inf, 0)

    it = 0
    lo, hi = 0.0, 1.0
    s_hi = score_at(hi)
    while s_hi > 0:
        it += 1
        lo, hi = hi, 2.0 * hi
        if math.isinf(hi):
            # fields too small for the root to be representable
            return MpleResult(math.inf, INFINITE, s_inf, it)
        s_hi = score_at(hi)
    if s_hi == 0:
        return MpleResult(hi, INTERIOR, 0.0, it)

    # bisection to full floating-point resolution; score is monotone
    best_x, best_s = hi, s_hi
    while True:
        it += 1
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s = score_at(mid)
        if abs(s) < abs(best_s):
            best_x, best_s = mid, s
        if s == 0:
            break
        if s > 0:
            lo = mid
        else:
            hi = mid
    if best_s != 0:
        d = _derivative_from_fields(local, best_x)
        if d < 0:
            x_new = best_x - best_s / d
            if x_new > 0:
                s_new = score_at(x_new)
                if abs(s_new) < abs(best_s):
                    best_x, best_s = x_new, s_new
    return MpleResult(best_x, INTERIOR, best_s, it)


def mple(cmat: CouplingMatrix, sigma) -> MpleResult:
    """Maximum pseudolikelihood estimate ``inf{x >= 0 : L_sigma(x) = 0}``.

    Non-existence of a finite positive root is reported through the result
    status rather than raised: ``boundary_zero`` when ``L(0) <= 0`` (up to a
    relative ``ZERO_SCORE_RTOL`` of roundoff),
    ``infinite`` when ``L(inf) >= 0`` (then ``L > 0`` for every finite
    ``x``), ``degenerate`` when every local field is zero.  When
    ``L(inf) < 0`` a finite root exists.

    The upper bracket is doubled from 1; bisection then runs to the
    floating-point resolution of the bracket and a final Newton step polishes
    the residual, which ends up far below ``DEFAULT_TOL``.
    """
    cmat = check_coupling(cmat)
    sigma = check_spins(sigma, cmat.n, allow_2d=True)
    return mple_from_fields(cmat.matvec(sigma.astype(float)), sigma)


def mple_many(cmat: CouplingMatrix, configs) -> list:
    """Separate MPLE for each row of ``configs``."""
    cmat = check_coupling(cmat)
    configs = check_spins(configs, cmat.n, allow_2d=True)
    if configs.ndim == 1:
        configs = configs[None, :]
    fields = cmat.matvec(configs.astype(float))
    return [mple_from_fields(fields[k], configs[k]) for k in range(len(configs))]


def status_counts(results) -> dict:
    counts = dict.fromkeys(STATUSES, 0)
    for r in results:
        counts[r.status] += 1
    return counts
