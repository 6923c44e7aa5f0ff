"""Weighted chi-square limit law and power of the most powerful test.

For a dense graph with adjacency ``A`` the statistic ``H = sigma'A sigma / n``
converges, for ``beta < 1/lambda_max``, to

    Q_beta = sum_i lambda_i (xi_i / (1 - beta lambda_i) - 1),   xi_i iid chi^2_1,

with ``lambda_i`` the eigenvalues of ``A/n``.  The most powerful level-alpha
test of ``beta_1`` against ``beta_2 > beta_1`` rejects when ``H`` exceeds the
``1 - alpha`` quantile of ``Q_{beta_1}``.

All Monte Carlo laws built from the same seed share their chi-square draws,
so laws at different ``beta`` are coupled draw by draw.  That makes the
power exactly ``alpha``-calibrated at ``beta_2 = beta_1`` (up to the order
statistic) and exactly monotone in ``beta_2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import erfc, erfcinv

from .coupling import CouplingMatrix, LabeledGraph, spectrum
from .errors import DomainError, InvalidParameterError
from .gibbs import ChainConfig, child_seed, hamiltonian, sample_replicates
from .validation import check_alpha, check_beta, check_count, check_coupling

TRUNCATION_TOL = 1e-6
DEFAULT_DRAWS = 1_000_000
_SHARD_CELLS = 1 << 22
# eigenvalues equal to this relative precision share one chi^2_k draw
_GROUP_RTOL = 1e-9


def graphon_spectrum(graph, truncation_tol: float = TRUNCATION_TOL) -> np.ndarray:
    """Eigenvalues of ``A/n`` with ``|lambda| >= truncation_tol``, descending.

    ``graph`` is a :class:`LabeledGraph`, an adjacency matrix, or a
    :class:`CouplingMatrix` which is taken to already be ``A/n``.
    """
    if isinstance(graph, CouplingMatrix):
        cmat = graph
    elif isinstance(graph, LabeledGraph):
        cmat = graph.coupling()
    else:
        adj = sp.csr_array(graph, dtype=float) if sp.issparse(graph) else np.asarray(graph, dtype=float)
        cmat = CouplingMatrix(adj / adj.shape[0], kind="custom")
    spec = spectrum(cmat)
    lam = np.asarray(spec.eigenvalues, dtype=float)
    return lam[np.abs(lam) >= truncation_tol].copy()


def _group(lambdas):
    lam = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    values, counts = [], []
    for x in lam:
        if values and abs(x - values[-1]) <= _GROUP_RTOL * max(abs(x), abs(values[-1])):
            counts[-1] += 1
        else:
            values.append(float(x))
            counts.append(1)
    return np.array(values), np.array(counts, dtype=np.int64)


def _check_domain(lambdas, beta):
    lam = np.asarray(lambdas, dtype=float)
    top = float(lam.max()) if lam.size else 0.0
    if top > 0 and beta * top >= 1:
        raise DomainError(
            f"limit law requires beta < 1/lambda_max = {1.0 / top:.12g}, got beta={beta}"
        )


def coupled_draws(lambdas, betas, count: int, seed=None) -> np.ndarray:
    """Draws of ``Q_beta`` for several ``beta`` from common chi-square variates.

    Returns an array of shape ``(len(betas), count)``.  Generation proceeds in
    fixed-size shards, each from its own child of ``SeedSequence(seed)``.
    """
    count = check_count(count)
    betas = [check_beta(b) for b in betas]
    for b in betas:
        _check_domain(lambdas, b)
    values, mult = _group(lambdas)
    out = np.zeros((len(betas), count))
    if values.size == 0:
        return out
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    shard = max(1024, _SHARD_CELLS // values.size)
    coef = np.array([values / (1.0 - b * values) for b in betas])  # (B, G)
    offset = float(np.sum(values * mult))
    for k, start in enumerate(range(0, count, shard)):
        stop = min(count, start + shard)
        rng = np.random.default_rng(child_seed(root, k))
        xi = rng.chisquare(mult, size=(stop - start, values.size))
        out[:, start:stop] = coef @ xi.T - offset
    return out


@dataclass(frozen=True)
class LimitLaw:
    """Monte Carlo reservoir for ``Q_beta``; ``samples`` are sorted ascending."""

    lambdas: np.ndarray
    beta: float
    samples: np.ndarray = field(repr=False)
    seed: object = None

    @property
    def mean(self) -> float:
        lam = self.lambdas
        return float(np.sum(self.beta * lam ** 2 / (1 - self.beta * lam)))

    @property
    def variance(self) -> float:
        lam = self.lambdas
        return float(np.sum(2 * lam ** 2 / (1 - self.beta * lam) ** 2))


def sample_limit_law(lambdas, beta: float, count: int = DEFAULT_DRAWS, seed=None) -> LimitLaw:
    lam = np.sort(np.asarray(lambdas, dtype=float))[::-1]
    beta = check_beta(beta)
    draws = coupled_draws(lam, [beta], count, seed)[0]
    draws.sort()
    lam.setflags(write=False)
    draws.setflags(write=False)
    return LimitLaw(lam, beta, draws, seed)


def quantile(law: LimitLaw, alpha: float) -> float:
    """Type-1 empirical ``(1 - alpha)`` quantile of the reservoir."""
    alpha = check_alpha(alpha)
    s = law.samples
    if s.size == 0:
        raise InvalidParameterError("limit law reservoir is empty")
    return _order_stat(s, alpha)


def _order_stat(sorted_draws, alpha):
    k = math.ceil((1.0 - alpha) * sorted_draws.size - 1e-9)
    return float(sorted_draws[min(max(k, 1), sorted_draws.size) - 1])


def mp_power(lambdas, beta1: float, beta2: float, alpha: float,
             count: int = DEFAULT_DRAWS, seed=None) -> float:
    """Limiting power ``1 - F_{beta2}(q_{1-alpha, beta1})`` by Monte Carlo."""
    beta1, beta2 = check_beta(beta1, "beta1"), check_beta(beta2, "beta2")
    alpha = check_alpha(alpha)
    if beta2 < beta1:
        raise InvalidParameterError("mp_power needs beta1 <= beta2")
    draws = coupled_draws(lambdas, [beta1, beta2], count, seed)
    q = _order_stat(np.sort(draws[0]), alpha)
    return float(np.mean(draws[1] > q))


def chi2_1_sf(x):
    """Survival function of chi^2 with one degree of freedom, ``erfc(sqrt(x/2))``."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    return erfc(np.sqrt(0.5 * x))


def chi2_1_isf(alpha):
    """``q`` with ``P(chi^2_1 > q) = alpha``."""
    return 2.0 * erfcinv(np.asarray(alpha, dtype=float)) ** 2


def er_power_closed_form(p: float, beta0: float, alpha: float) -> float:
    """``P(chi^2_1 > (1 - beta0 p) q_{1-alpha})``: limiting power for G(n, p)."""
    if not 0 < p <= 1:
        raise InvalidParameterError(f"p must lie in (0, 1], got {p}")
    beta0 = check_beta(beta0, "beta0")
    alpha = check_alpha(alpha)
    if beta0 * p >= 1:
        raise DomainError(f"closed form requires beta0 < 1/p = {1.0 / p:.12g}, got {beta0}")
    return float(chi2_1_sf((1.0 - beta0 * p) * chi2_1_isf(alpha)))


def null_threshold(cmat: CouplingMatrix, beta1: float, alpha: float, law_count: int = 200_000,
                   seed=None, truncation_tol: float = TRUNCATION_TOL) -> float:
    """``q_{1-alpha, beta1}`` from the limit law with the finite-n spectrum of ``J``."""
    lam = graphon_spectrum(cmat, truncation_tol)
    return quantile(sample_limit_law(lam, beta1, law_count, seed), alpha)


def empirical_power(cmat: CouplingMatrix, beta1: float, beta2: float, alpha: float, reps: int,
                    cfg: ChainConfig | None = None, *, law_count: int = 200_000,
                    threshold: float | None = None, offset: float = 0.0,
                    method: str = "auto") -> float:
    """Rejection rate of ``H(sigma) > q_{1-alpha, beta1}`` over ``reps`` draws at ``beta2``.

    ``J`` plays the role of ``A/n``, so ``H(sigma) = sigma' J sigma`` is the
    dense-graph statistic.  The statistic is compared to the limit-law
    quantile without finite-n centering; ``offset`` is subtracted from it
    first if a different convention is wanted.  ``threshold`` skips the limit
    law computation.  Draws at ``beta2`` come from independent chains (exact
    sampling when n <= 20 and ``method="auto"``).
    """
    cmat = check_coupling(cmat)
    alpha = check_alpha(alpha)
    beta2 = check_beta(beta2, "beta2")
    cfg = cfg or ChainConfig()
    if threshold is None:
        law_seed = child_seed(cfg.seed, 2**20)
        threshold = null_threshold(cmat, beta1, alpha, law_count, law_seed)
    configs = sample_replicates(cmat, beta2, reps, cfg, method=method)
    stats = np.atleast_1d(hamiltonian(cmat, configs)) - offset
    return float(np.mean(stats > threshold))


@dataclass(frozen=True)
class PowerCurve:
    """Limiting power on a ``beta1 x beta2`` grid (``nan`` where ``beta2 < beta1``)."""

    alpha: float
    beta1: np.ndarray
    beta2: np.ndarray
    power: np.ndarray


def power_curve(lambdas, alpha: float, beta1_grid, beta2_grid, count: int = DEFAULT_DRAWS,
                seed=None) -> PowerCurve:
    alpha = check_alpha(alpha)
    b1 = np.asarray(beta1_grid, dtype=float)
    b2 = np.asarray(beta2_grid, dtype=float)
    draws = coupled_draws(lambdas, list(b1) + list(b2), count, seed)
    power = np.full((b1.size, b2.size), np.nan)
    for i, x in enumerate(b1):
        q = _order_stat(np.sort(draws[i]), alpha)
        for j, y in enumerate(b2):
            if y >= x:
                power[i, j] = np.mean(draws[b1.size + j] > q)
    return PowerCurve(alpha, b1, b2, power)
