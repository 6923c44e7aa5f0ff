"""Experiment grids behind the command line tool.

Each ``run_*`` function is a pure function of its arguments: the same inputs
(including ``seed``) always give the same rows.  Cells of a grid get their
own seed from ``child_seed(seed, tag, i, j)`` where ``i, j`` are grid indices,
so cells can be evaluated in any order or concurrently.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .bootstrap import FitReport, analyze_network
from .coupling import (
    CouplingMatrix,
    LabeledGraph,
    block_example,
    circulant_regular,
    coupling_from_pairs,
    curie_weiss,
    er_edges,
    er_scaled,
    from_edge_list,
    read_edge_list,
    spectrum,
)
from .errors import DomainError, InvalidParameterError
from .gibbs import ChainConfig, child_seed, sample_replicates
from .mple import INTERIOR, mple_many, status_counts
from .mptest import empirical_power, er_power_closed_form, null_threshold
from .partition import partition_report

ENSEMBLES = ("cw", "er", "regular", "block")

# seed tags, kept distinct so graph draws never share streams with chains
_GRAPH, _CHAIN, _LAW = 0, 1, 2


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def er_probability(n: int, p: float | None = None, p_exponent: float = 1.0 / 3.0) -> float:
    """Edge probability ``p`` if given, else ``n ** -p_exponent``."""
    return float(p) if p is not None else float(n) ** (-p_exponent)


def regular_degree(n: int, degree: int | None = None, degree_exponent: float = 0.5) -> int:
    """``degree`` if given, else the even integer nearest ``n ** degree_exponent``."""
    if degree is not None:
        return int(degree)
    d = 2 * max(1, round(n ** degree_exponent / 2))
    return min(d, n - 1 - (n - 1) % 2)


def make_ensemble(name: str, n: int, seed=0, *, p: float | None = None,
                  p_exponent: float = 1.0 / 3.0, degree: int | None = None,
                  degree_exponent: float = 0.5) -> CouplingMatrix:
    """Coupling matrix of one ensemble member.

    ``er`` is ``A/(n p)`` for one G(n, p) draw seeded by ``child_seed(seed, 0, n)``;
    ``regular`` is the circulant ``d``-regular graph over ``d``.
    """
    if name == "cw":
        return curie_weiss(n)
    if name == "er":
        return er_scaled(n, er_probability(n, p, p_exponent), child_seed(seed, _GRAPH, n))
    if name == "regular":
        return circulant_regular(n, regular_degree(n, degree, degree_exponent))
    if name == "block":
        return block_example(n)
    raise InvalidParameterError(f"unknown ensemble {name!r}; choose from {', '.join(ENSEMBLES)}")


def er_dense(n: int, p: float, seed=None) -> CouplingMatrix:
    """``A/n`` for a G(n, p) draw: the dense-graph scaling used by the MP test."""
    return coupling_from_pairs(n, er_edges(n, p, seed), 1.0 / n)


# ---------------------------------------------------------------------------
# Error bars and rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateRow:
    ensemble: str
    n: int
    beta: float
    mean_beta_hat: float
    sd_beta_hat: float
    noninterior_fraction: float
    reps: int
    interior: int
    boundary_zero: int
    infinite: int
    degenerate: int


@dataclass(frozen=True)
class RateFit:
    """Least-squares line ``log sd = intercept + slope * log n`` at one beta."""

    beta: float
    slope: float
    intercept: float
    r2: float
    sd_ratio: float
    n_min: int
    n_max: int
    points: int


def _rate_row(ensemble, n, beta, fits, reps):
    counts = status_counts(fits)
    est = np.array([r.beta_hat for r in fits if r.status == INTERIOR])
    mean = float(np.mean(est)) if est.size else math.nan
    sd = float(np.std(est, ddof=1)) if est.size >= 2 else math.nan
    return RateRow(ensemble, n, beta, mean, sd, 1.0 - counts[INTERIOR] / reps, reps,
                   counts["interior"], counts["boundary_zero"], counts["infinite"],
                   counts["degenerate"])


def fit_rates(rows) -> list:
    """Per beta, regress ``log sd`` on ``log n`` over rows with a positive finite sd."""
    out = []
    for beta in sorted({r.beta for r in rows}):
        pts = sorted((r.n, r.sd_beta_hat) for r in rows
                     if r.beta == beta and math.isfinite(r.sd_beta_hat) and r.sd_beta_hat > 0)
        if len(pts) < 2:
            continue
        x = np.log([n for n, _ in pts])
        y = np.log([s for _, s in pts])
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (intercept + slope * x)
        ss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss if ss > 0 else 1.0
        out.append(RateFit(beta, float(slope), float(intercept), r2, pts[0][1] / pts[-1][1],
                           pts[0][0], pts[-1][0], len(pts)))
    return out


def run_errorbars(ensemble: str, ns, betas, reps: int, seed=0, cfg: ChainConfig | None = None,
                  jobs: int = 1, **ensemble_kw):
    """MPLE spread over ``reps`` independent draws per ``(n, beta)`` cell.

    One coupling matrix is built per ``n`` and shared by all betas.  Returns
    ``(rows, rate_fits)``.  The sd is over interior replicates only.
    """
    if ensemble not in ENSEMBLES:
        raise InvalidParameterError(f"unknown ensemble {ensemble!r}; choose from {', '.join(ENSEMBLES)}")
    cfg = cfg or ChainConfig()
    ns = [int(n) for n in ns]
    betas = [float(b) for b in betas]
    couplings = {n: make_ensemble(ensemble, n, seed, **ensemble_kw) for n in ns}
    cells = [(i, j) for i in range(len(ns)) for j in range(len(betas))]

    def cell(ij):
        i, j = ij
        n, beta = ns[i], betas[j]
        cmat = couplings[n]
        c = replace(cfg, seed=child_seed(seed, _CHAIN, i, j))
        fits = mple_many(cmat, sample_replicates(cmat, beta, reps, c))
        return _rate_row(ensemble, n, beta, fits, reps)

    rows = sorted(_map(cell, cells, jobs), key=lambda r: (r.n, r.beta))
    return rows, fit_rates(rows)


# ---------------------------------------------------------------------------
# Power
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerRow:
    p: float
    beta: float
    power: float
    limit: float | None
    threshold: float
    reps: int


def _closed_form_or_none(p, beta, alpha):
    try:
        return er_power_closed_form(p, beta, alpha)
    except DomainError:
        return None


def run_power_heatmap(n: int, ps, betas, reps: int, alpha: float = 0.05, seed=0,
                      cfg: ChainConfig | None = None, law_count: int = 200_000,
                      offset: float = 0.0, jobs: int = 1) -> list:
    """Empirical MP-test power of ``beta = 0`` against each ``beta`` on G(n, p).

    For every ``p`` one graph is drawn and the null threshold is computed
    from its own ``A/n`` spectrum; the limit column is the closed form where
    ``beta p < 1``.
    """
    cfg = cfg or ChainConfig()
    ps = [float(p) for p in ps]
    betas = [float(b) for b in betas]
    graphs = {i: er_dense(n, p, child_seed(seed, _GRAPH, i)) for i, p in enumerate(ps)}
    thresholds = {i: null_threshold(graphs[i], 0.0, alpha, law_count, child_seed(seed, _LAW, i))
                  for i in graphs}
    cells = [(i, j) for i in range(len(ps)) for j in range(len(betas))]

    def cell(ij):
        i, j = ij
        c = replace(cfg, seed=child_seed(seed, _CHAIN, i, j))
        pw = empirical_power(graphs[i], 0.0, betas[j], alpha, reps, c,
                             threshold=thresholds[i], offset=offset)
        return PowerRow(ps[i], betas[j], pw, _closed_form_or_none(ps[i], betas[j], alpha),
                        thresholds[i], reps)

    return sorted(_map(cell, cells, jobs), key=lambda r: (r.p, r.beta))


def run_cw_power(n: int, betas, reps: int, alpha: float = 0.05, seed=0,
                 cfg: ChainConfig | None = None, law_count: int = 200_000,
                 offset: float = 0.0, jobs: int = 1) -> list:
    """Curie–Weiss power curve: empirical rejection rate and its ``p = 1`` limit."""
    cfg = cfg or ChainConfig()
    betas = [float(b) for b in betas]
    cmat = curie_weiss(n)
    q = null_threshold(cmat, 0.0, alpha, law_count, child_seed(seed, _LAW, 0))

    def cell(j):
        c = replace(cfg, seed=child_seed(seed, _CHAIN, 0, j))
        pw = empirical_power(cmat, 0.0, betas[j], alpha, reps, c, threshold=q, offset=offset)
        return PowerRow(1.0, betas[j], pw, _closed_form_or_none(1.0, betas[j], alpha), q, reps)

    return sorted(_map(cell, list(range(len(betas))), jobs), key=lambda r: r.beta)


# ---------------------------------------------------------------------------
# Partition bounds, network analysis, raw samples
# ---------------------------------------------------------------------------

def run_partition(ensemble: str, n: int, betas, seed=0, **ensemble_kw) -> list:
    cmat = make_ensemble(ensemble, n, seed, **ensemble_kw)
    spec = spectrum(cmat) if cmat.nonnegative else None
    return [partition_report(cmat, float(b), spec) for b in sorted(float(b) for b in betas)]


def toy_network() -> LabeledGraph:
    """Small bundled labeled network used by ``analyze`` when no files are given."""
    pkg = resources.files("isinginfer") / "data"
    edges = (pkg / "toy_edges.txt").read_text(encoding="utf-8")
    labels = (pkg / "toy_labels.txt").read_text(encoding="utf-8")
    graph, _ = from_edge_list(edges, labels, edges_source="toy_edges.txt",
                              labels_source="toy_labels.txt")
    return graph


def load_network(edges_path=None, labels_path=None) -> LabeledGraph:
    if edges_path is None and labels_path is None:
        return toy_network()
    if edges_path is None or labels_path is None:
        raise InvalidParameterError("give both an edge list and a label file, or neither")
    graph, _ = read_edge_list(edges_path, labels_path)
    return graph


def run_analyze(graph: LabeledGraph, b_boot: int, b_null: int, seed=0,
                cfg: ChainConfig | None = None, statistic: str = "H") -> FitReport:
    cfg = replace(cfg or ChainConfig(), seed=seed)
    return analyze_network(graph, b_boot, b_null, cfg, statistic)


def run_sample(cmat: CouplingMatrix, beta: float, count: int, seed=0,
               cfg: ChainConfig | None = None, method: str = "auto") -> np.ndarray:
    """``count`` configurations from independent chains (exact for n <= 20)."""
    cfg = replace(cfg or ChainConfig(), seed=seed)
    return sample_replicates(cmat, beta, count, cfg, method=method)
