"""Sampling spin configurations from the Ising measure.

The measure is ``P_beta(tau) = 2^-n exp(beta H(tau) / 2 - F(beta))`` with
``H(tau) = tau' J tau``.  Small systems are sampled exactly by enumerating
all ``2^n`` states; larger ones with single-site Glauber (heat-bath) dynamics.

Glauber dynamics mixes fast away from the critical point (``beta ~ 1`` for
the normalized ensembles).  Near criticality samples are approximate with
unquantified bias; callers choose the burn-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import logsumexp

from . import _kernels
from .coupling import CouplingMatrix
from .errors import CapacityError, InvalidParameterError
from .validation import check_beta, check_count, check_coupling, check_spins

EXACT_MAX_N = 20
_CHUNK_STATES = 1 << 15
_MAX_UNIFORMS = 1 << 20
# chains run the dense kernel above this fill fraction, the CSR kernel below
_DENSE_KERNEL_DENSITY = 0.3


def hamiltonian(cmat: CouplingMatrix, tau) -> float | np.ndarray:
    """``tau' J tau`` over ordered pairs; vectorized over rows of a 2-D ``tau``."""
    cmat = check_coupling(cmat)
    tau = check_spins(tau, cmat.n, allow_2d=True).astype(float)
    if tau.ndim == 1:
        return float(tau @ cmat.matvec(tau))
    return np.einsum("ij,ij->i", tau, cmat.matvec(tau))


# ---------------------------------------------------------------------------
# Exact enumeration
# ---------------------------------------------------------------------------

def _check_capacity(n, what):
    if n > EXACT_MAX_N:
        raise CapacityError(
            f"{what} enumerates 2^n states and is capped at n={EXACT_MAX_N} (got n={n}); "
            "use glauber_sample for larger systems"
        )


def states(n: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Configurations with indices ``start..stop``; bit ``i`` set means spin ``i`` is -1."""
    stop = (1 << n) if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return (1 - 2 * bits).astype(np.int8)


def all_hamiltonians(cmat: CouplingMatrix) -> np.ndarray:
    """``H`` for every state, in index order."""
    cmat = check_coupling(cmat)
    _check_capacity(cmat.n, "enumeration")
    total = 1 << cmat.n
    out = np.empty(total)
    for start in range(0, total, _CHUNK_STATES):
        stop = min(total, start + _CHUNK_STATES)
        s = states(cmat.n, start, stop).astype(float)
        out[start:stop] = np.einsum("ij,ij->i", s, cmat.matvec(s))
    return out


def exact_log_pmf(cmat: CouplingMatrix, beta: float) -> np.ndarray:
    beta = check_beta(beta)
    h = all_hamiltonians(cmat)
    logw = 0.5 * beta * h
    return logw - logsumexp(logw)


def exact_expectation(cmat: CouplingMatrix, beta: float, func=None) -> float:
    """``E_beta[func(tau)]`` by enumeration; ``func`` defaults to ``H``."""
    logp = exact_log_pmf(cmat, beta)
    vals = all_hamiltonians(cmat) if func is None else np.asarray(func(states(cmat.n)), dtype=float)
    return float(np.sum(np.exp(logp) * vals))


def exact_sample(cmat: CouplingMatrix, beta: float, count: int, seed=None) -> np.ndarray:
    """I.i.d. draws from the exact pmf by inverting the cumulative table.

    Returns an ``(count, n)`` ``int8`` array.
    """
    cmat = check_coupling(cmat)
    _check_capacity(cmat.n, "exact_sample")
    count = check_count(count)
    p = np.exp(exact_log_pmf(cmat, beta))
    cdf = np.cumsum(p)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    bits = (idx[:, None] >> np.arange(cmat.n)) & 1
    return (1 - 2 * bits).astype(np.int8)


# ---------------------------------------------------------------------------
# Glauber dynamics
# ---------------------------------------------------------------------------

def default_burn_in(n: int) -> int:
    return max(1000, 20 * math.ceil(math.log(max(n, 2))))


@dataclass(frozen=True)
class ChainConfig:
    """Settings for one Glauber chain.

    ``init`` is ``"all_plus"``, ``"uniform_random"`` or an explicit +-1
    vector.  ``burn_in_sweeps=None`` picks :func:`default_burn_in`.
    """

    burn_in_sweeps: int | None = None
    thin_sweeps: int = 5
    scan: str = "systematic"
    seed: object = 0
    init: object = "uniform_random"

    def __post_init__(self):
        if self.thin_sweeps < 1:
            raise InvalidParameterError("thin_sweeps must be >= 1")
        if self.burn_in_sweeps is not None and self.burn_in_sweeps < 0:
            raise InvalidParameterError("burn_in_sweeps must be non-negative")
        if self.scan not in ("systematic", "random"):
            raise InvalidParameterError(f"scan must be 'systematic' or 'random', got {self.scan!r}")
        if isinstance(self.init, str) and self.init not in ("all_plus", "uniform_random"):
            raise InvalidParameterError(f"unknown init {self.init!r}")

    def burn_in_for(self, n: int) -> int:
        return default_burn_in(n) if self.burn_in_sweeps is None else int(self.burn_in_sweeps)


def child_seed(seed, *keys) -> np.random.SeedSequence:
    """Deterministic child of ``seed`` addressed by integer ``keys``."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy,
                                      spawn_key=tuple(seed.spawn_key) + tuple(int(k) for k in keys))
    return np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))


def replicate_seed(seed, index: int) -> np.random.SeedSequence:
    """Independent child seed for replicate ``index`` of a run seeded with ``seed``."""
    return child_seed(seed, index)


class _Chain:
    """Mutable chain state: spins, maintained local fields and a generator."""

    def __init__(self, cmat: CouplingMatrix, beta: float, sigma: np.ndarray, rng, scan: str):
        self.cmat = cmat
        self.beta = beta
        self.sigma = np.ascontiguousarray(sigma, dtype=np.int8).copy()
        self.rng = rng
        self.scan = scan
        self.dense = cmat.density > _DENSE_KERNEL_DENSITY and not cmat.is_sparse
        if self.dense:
            self._J = np.ascontiguousarray(cmat.toarray())
        else:
            csr = cmat.csr
            self._csr = (csr.indptr.astype(np.int64), csr.indices.astype(np.int64),
                         csr.data.astype(float))
        self.refresh_fields()

    def refresh_fields(self):
        self.local = np.ascontiguousarray(self.cmat.matvec(self.sigma.astype(float)))

    def run(self, sweeps: int):
        n = self.cmat.n
        if n == 0 or sweeps <= 0:
            return
        per_block = max(1, _MAX_UNIFORMS // n)
        left = sweeps
        while left > 0:
            k = min(left, per_block)
            u = self.rng.random(k * n)
            if self.scan == "random":
                sites = self.rng.integers(0, n, size=k * n, dtype=np.int64)
            else:
                sites = _kernels.EMPTY_SITES
            if self.dense:
                _kernels.heat_bath_dense(self._J, self.beta, self.sigma, self.local, u, sites)
            else:
                indptr, indices, data = self._csr
                _kernels.heat_bath_csr(indptr, indices, data, self.beta, self.sigma, self.local, u, sites)
            left -= k


def glauber_sweep(cmat: CouplingMatrix, beta: float, sigma, scan: str = "systematic",
                  rng=None, return_fields: bool = False):
    """One sweep of ``n`` heat-bath updates; returns the new configuration.

    Site ``i`` is resampled with ``P(+1 | rest) = 1 / (1 + exp(-2 beta m_i))``.
    With ``return_fields`` the incrementally maintained local fields are
    returned too.
    """
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    sigma = check_spins(sigma, cmat.n)
    if scan not in ("systematic", "random"):
        raise InvalidParameterError(f"scan must be 'systematic' or 'random', got {scan!r}")
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    chain = _Chain(cmat, beta, sigma, rng, scan)
    chain.run(1)
    if return_fields:
        return chain.sigma, chain.local
    return chain.sigma


def _initial(cmat, init, rng):
    if isinstance(init, str):
        if init == "all_plus":
            return np.ones(cmat.n, dtype=np.int8)
        return (2 * rng.integers(0, 2, size=cmat.n) - 1).astype(np.int8)
    return check_spins(init, cmat.n)


def glauber_sample(cmat: CouplingMatrix, beta: float, count: int,
                   cfg: ChainConfig | None = None) -> np.ndarray:
    """Run one chain: burn in, then emit a configuration every ``thin_sweeps`` sweeps.

    Returns ``(count, n)`` ``int8``; bit-identical for equal ``cfg.seed``.
    """
    cmat = check_coupling(cmat)
    beta = check_beta(beta)
    count = check_count(count)
    cfg = cfg or ChainConfig()
    rng = np.random.default_rng(cfg.seed)
    chain = _Chain(cmat, beta, _initial(cmat, cfg.init, rng), rng, cfg.scan)
    chain.run(cfg.burn_in_for(cmat.n))
    out = np.empty((count, cmat.n), dtype=np.int8)
    for k in range(count):
        chain.run(cfg.thin_sweeps)
        # guard against drift in the incrementally updated fields
        chain.refresh_fields()
        out[k] = chain.sigma
    return out


def sample_replicates(cmat: CouplingMatrix, beta: float, reps: int, cfg: ChainConfig | None = None,
                      method: str = "auto") -> np.ndarray:
    """One configuration from each of ``reps`` independent chains.

    Replicate ``r`` uses ``replicate_seed(cfg.seed, r)``.  With
    ``method="auto"`` systems of at most 20 spins are sampled exactly.
    """
    cmat = check_coupling(cmat)
    reps = check_count(reps, "reps")
    cfg = cfg or ChainConfig()
    if method == "auto":
        method = "exact" if cmat.n <= EXACT_MAX_N else "glauber"
    if method == "exact":
        return exact_sample(cmat, beta, reps, seed=cfg.seed)
    if method != "glauber":
        raise InvalidParameterError(f"unknown sampling method {method!r}")
    out = np.empty((reps, cmat.n), dtype=np.int8)
    for r in range(reps):
        out[r] = glauber_sample(cmat, beta, 1, replace(cfg, seed=replicate_seed(cfg.seed, r)))[0]
    return out
