"""Parametric bootstrap and independence-null p-values for fitted networks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coupling import LabeledGraph
from .errors import InvalidParameterError, NotApplicableError
from .gibbs import ChainConfig, child_seed, hamiltonian, sample_replicates
from .mple import INTERIOR, MpleResult, mple, mple_many, status_counts
from .validation import check_count, check_coupling, check_spins

UNRELIABLE_FRACTION = 0.20
DEFAULT_B_BOOT = 2000
DEFAULT_B_NULL = 999


def parametric_bootstrap_se(cmat, beta_hat: float, replicates: int = DEFAULT_B_BOOT,
                            cfg: ChainConfig | None = None, method: str = "auto"):
    """Bootstrap standard error of the MPLE at ``beta_hat``.

    Draws ``replicates`` configurations at ``beta_hat`` from independent chains (exact
    sampling for n <= 20), refits each, and returns
    ``(se, status_counts)`` where ``se`` is the sample standard deviation over
    interior replicates only.
    """
    cmat = check_coupling(cmat)
    replicates = check_count(replicates, "replicates", minimum=2)
    if beta_hat is None or not math.isfinite(beta_hat) or beta_hat < 0:
        raise NotApplicableError(f"bootstrap needs a finite non-negative estimate, got {beta_hat}")
    configs = sample_replicates(cmat, beta_hat, replicates, cfg or ChainConfig(), method=method)
    fits = mple_many(cmat, configs)
    counts = status_counts(fits)
    est = np.array([r.beta_hat for r in fits if r.status == INTERIOR])
    if est.size < 2:
        raise NotApplicableError(
            f"only {est.size} of {replicates} bootstrap replicates have an interior MPLE ({counts})"
        )
    return float(np.std(est, ddof=1)), counts


def bootstrap_estimates(cmat, beta_hat: float, replicates: int, cfg: ChainConfig | None = None,
                        method: str = "auto") -> list:
    """The per-replicate :class:`MpleResult` list behind :func:`parametric_bootstrap_se`."""
    cmat = check_coupling(cmat)
    configs = sample_replicates(cmat, beta_hat, replicates, cfg or ChainConfig(), method=method)
    return mple_many(cmat, configs)


def _mple_stat(cmat, configs):
    vals = []
    for r in mple_many(cmat, configs):
        vals.append(-math.inf if math.isnan(r.beta_hat) else r.beta_hat)
    return np.array(vals)


def null_pvalue(cmat, sigma_observed, replicates: int = DEFAULT_B_NULL, statistic: str = "H",
                seed=None) -> float:
    """Monte Carlo p-value against independence (``beta = 0``).

    ``p = (1 + #{replicate statistic >= observed}) / (replicates + 1)`` with ``replicates``
    uniform +-1 vectors, which are exact draws under the null at any n.
    ``statistic`` is ``"H"`` (the sufficient statistic) or ``"mple"``.
    """
    cmat = check_coupling(cmat)
    sigma = check_spins(sigma_observed, cmat.n)
    replicates = check_count(replicates, "replicates", minimum=99)
    rng = np.random.default_rng(seed)
    draws = (2 * rng.integers(0, 2, size=(replicates, cmat.n)) - 1).astype(np.int8)
    if statistic == "H":
        obs = hamiltonian(cmat, sigma)
        vals = np.atleast_1d(hamiltonian(cmat, draws))
        tol = 1e-12 * max(1.0, abs(obs))
        hits = int(np.sum(vals >= obs - tol))
    elif statistic == "mple":
        r = mple(cmat, sigma)
        obs = -math.inf if math.isnan(r.beta_hat) else r.beta_hat
        vals = _mple_stat(cmat, draws)
        tol = 1e-12 * max(1.0, abs(obs)) if math.isfinite(obs) else 0.0
        hits = int(np.sum(vals >= obs - tol))
    else:
        raise InvalidParameterError(f"unknown statistic {statistic!r}")
    return (1 + hits) / (replicates + 1)


@dataclass(frozen=True)
class FitReport:
    """MPLE fit of a labeled network with bootstrap SE and null p-value.

    ``se_boot`` is ``None`` when the bootstrap does not apply (infinite or
    degenerate estimate, or fewer than two interior replicates).
    ``se_reliable`` is false when more than 20% of replicates were
    non-interior.
    """

    beta_hat: MpleResult
    se_boot: float | None
    p_value_null: float
    reps_used: dict
    statuses: dict = field(default_factory=dict)
    n_nodes: int = 0
    n_edges: int = 0
    statistic: str = "H"

    @property
    def noninterior_fraction(self) -> float | None:
        total = sum(self.statuses.values())
        if not total:
            return None
        return 1.0 - self.statuses.get(INTERIOR, 0) / total

    @property
    def se_reliable(self) -> bool:
        frac = self.noninterior_fraction
        return self.se_boot is not None and frac is not None and frac <= UNRELIABLE_FRACTION

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "beta_hat": self.beta_hat.beta_hat,
            "status": self.beta_hat.status,
            "residual": self.beta_hat.residual,
            "se_boot": self.se_boot,
            "se_reliable": self.se_reliable,
            "noninterior_fraction": self.noninterior_fraction,
            "p_value_null": self.p_value_null,
            "statistic": self.statistic,
            "b_boot": self.reps_used.get("bootstrap"),
            "b_null": self.reps_used.get("null"),
            **{f"boot_{k}": v for k, v in self.statuses.items()},
        }

    def summary(self) -> str:
        b = self.beta_hat
        lines = [
            f"nodes={self.n_nodes} edges={self.n_edges}",
            f"MPLE beta_hat={b.beta_hat:.6g} status={b.status} residual={b.residual:.3g}",
        ]
        if self.se_boot is None:
            lines.append("bootstrap se: not applicable")
        else:
            flag = "" if self.se_reliable else " (unreliable: >20% non-interior replicates)"
            lines.append(f"bootstrap se={self.se_boot:.6g} over {self.reps_used.get('bootstrap')} "
                         f"replicates, non-interior fraction={self.noninterior_fraction:.4g}{flag}")
        lines.append(f"null p-value ({self.statistic}, replicates={self.reps_used.get('null')})="
                     f"{self.p_value_null:.6g}")
        return "\n".join(lines)


def analyze_network(graph: LabeledGraph, B_boot: int = DEFAULT_B_BOOT, B_null: int = DEFAULT_B_NULL,
                    cfg: ChainConfig | None = None, statistic: str = "H") -> FitReport:
    """Fit the ``A/n`` Ising model to the node labels and attach SE and p-value."""
    cfg = cfg or ChainConfig()
    cmat = graph.coupling()
    sigma = graph.labels
    fit = mple(cmat, sigma)
    se, counts = None, {}
    if fit.status in (INTERIOR, "boundary_zero"):
        boot_cfg = replace(cfg, seed=child_seed(cfg.seed, 1))
        fits = bootstrap_estimates(cmat, fit.beta_hat, check_count(B_boot, "B_boot", 2), boot_cfg)
        counts = status_counts(fits)
        est = np.array([r.beta_hat for r in fits if r.status == INTERIOR])
        se = float(np.std(est, ddof=1)) if est.size >= 2 else None
    null_seed = child_seed(cfg.seed, 2)
    p = null_pvalue(cmat, sigma, B_null, statistic, seed=null_seed)
    return FitReport(fit, se, p, {"bootstrap": B_boot if counts else 0, "null": B_null}, counts,
                     graph.n, graph.n_edges, statistic)
