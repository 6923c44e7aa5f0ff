"""Coupling matrices for one-parameter Ising models.

A coupling matrix ``J`` is symmetric with a zero diagonal; the sufficient
statistic of the model is the quadratic form ``H(tau) = tau' J tau`` summed
over ordered pairs.  Constructors for the standard graph ensembles live here,
together with edge-list ingestion and spectral summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    DegreeMismatchError,
    InvalidParameterError,
    InvalidSizeError,
    ParseError,
)

KINDS = ("curie_weiss", "regular_scaled", "er_scaled", "block", "custom")

# Hybrid storage rule: edge-list (CSR) backing for large sparse matrices.
SPARSE_MIN_N = 1000
SPARSE_MAX_DENSITY = 0.10

DENSE_EIG_CAP = 5000
POWER_TOL = 1e-10
POWER_MAXITER = 10_000


def _freeze(a):
    if sp.issparse(a):
        for arr in (a.data, a.indices, a.indptr):
            arr.setflags(write=False)
    else:
        a.setflags(write=False)
    return a


class CouplingMatrix:
    """Immutable symmetric coupling matrix with zero diagonal.

    Parameters
    ----------
    entries : array_like or scipy.sparse matrix
        Square symmetric matrix.
    kind : str
        One of ``KINDS``.  Every kind except ``"custom"`` must be
        entrywise non-negative.
    storage : {"auto", "dense", "sparse"}
        ``"auto"`` stores matrices with more than 1000 spins and at most 10%
        non-zero density as CSR, everything else densely.
    """

    def __init__(self, entries, kind="custom", storage="auto"):
        if kind not in KINDS:
            raise InvalidParameterError(f"unknown coupling kind {kind!r}")
        if sp.issparse(entries):
            mat = sp.csr_array(entries, dtype=float)
        else:
            mat = np.array(entries, dtype=float)
            if mat.ndim != 2:
                raise InvalidSizeError("coupling matrix must be two-dimensional")
        if mat.shape[0] != mat.shape[1]:
            raise InvalidSizeError(f"coupling matrix must be square, got {mat.shape}")
        n = mat.shape[0]
        if n < 1:
            raise InvalidSizeError("coupling matrix must have at least one spin")

        if sp.issparse(mat):
            mat.eliminate_zeros()
            mat.sum_duplicates()
            mat.sort_indices()
            if np.any(mat.diagonal() != 0):
                raise InvalidParameterError("coupling matrix must have a zero diagonal")
            asym = abs(mat - mat.T)
            if asym.nnz and asym.max() > 1e-12 * max(1.0, abs(mat).max()):
                raise InvalidParameterError("coupling matrix must be symmetric")
            mat = ((mat + mat.T) * 0.5).tocsr()
            nnz = mat.nnz
            negative = mat.nnz and mat.data.min() < 0
        else:
            if not np.all(np.isfinite(mat)):
                raise InvalidParameterError("coupling matrix has non-finite entries")
            if np.any(np.diag(mat) != 0):
                raise InvalidParameterError("coupling matrix must have a zero diagonal")
            scale = max(1.0, float(np.abs(mat).max()))
            if np.abs(mat - mat.T).max() > 1e-12 * scale:
                raise InvalidParameterError("coupling matrix must be symmetric")
            mat = 0.5 * (mat + mat.T)
            nnz = int(np.count_nonzero(mat))
            negative = bool((mat < 0).any())
        if kind != "custom" and negative:
            raise InvalidParameterError(f"kind {kind!r} requires non-negative couplings")

        density = nnz / (n * n)
        if storage == "auto":
            storage = "sparse" if (n > SPARSE_MIN_N and density <= SPARSE_MAX_DENSITY) else "dense"
        if storage == "sparse":
            mat = sp.csr_array(mat)
            mat.eliminate_zeros()
            mat.sort_indices()
        elif storage == "dense":
            mat = mat.toarray() if sp.issparse(mat) else np.ascontiguousarray(mat)
        else:
            raise InvalidParameterError(f"unknown storage {storage!r}")

        self.n = n
        self.kind = kind
        self.nnz = nnz
        self._mat = _freeze(mat)

    def __repr__(self):
        backing = "sparse" if self.is_sparse else "dense"
        return f"CouplingMatrix(n={self.n}, kind={self.kind!r}, nnz={self.nnz}, {backing})"

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._mat)

    @property
    def density(self) -> float:
        return self.nnz / (self.n * self.n)

    @property
    def nonnegative(self) -> bool:
        if self.is_sparse:
            return self.nnz == 0 or bool(self._mat.data.min() >= 0)
        return bool((self._mat >= 0).all())

    def toarray(self) -> np.ndarray:
        """Dense read-only view (a copy when the backing is sparse)."""
        if self.is_sparse:
            return _freeze(self._mat.toarray())
        return self._mat

    @cached_property
    def csr(self) -> sp.csr_array:
        if self.is_sparse:
            return self._mat
        out = sp.csr_array(self._mat)
        out.eliminate_zeros()
        out.sort_indices()
        return _freeze(out)

    def matvec(self, x) -> np.ndarray:
        """``J @ x`` for a vector or a stack of row vectors (``x @ J``)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            return np.asarray(self._mat @ x)
        return np.asarray((self._mat @ x.T).T)

    def __matmul__(self, x):
        return self.matvec(x)

    @cached_property
    def frobenius_norm_sq(self) -> float:
        if self.is_sparse:
            return float(np.sum(self._mat.data ** 2))
        return float(np.sum(self._mat ** 2))

    @cached_property
    def total(self) -> float:
        """Sum of all entries, ``1' J 1``."""
        return float(self._mat.sum())

    def upper_entries(self):
        """Non-zero entries strictly above the diagonal as ``(i, j, w)`` arrays."""
        coo = sp.triu(self.csr, k=1).tocoo()
        return coo.row, coo.col, coo.data

    def scaled(self, c: float) -> "CouplingMatrix":
        """Return ``c * J`` (kind ``custom``)."""
        return CouplingMatrix(self._mat * float(c), kind="custom",
                              storage="sparse" if self.is_sparse else "dense")

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix) or other.n != self.n:
            return NotImplemented
        diff = self.csr - other.csr
        return diff.nnz == 0 or not np.any(diff.data)

    __hash__ = None


# ---------------------------------------------------------------------------
# Ensembles
# ---------------------------------------------------------------------------

def curie_weiss(n: int) -> CouplingMatrix:
    """Complete-graph couplings ``J(i, j) = 1/n`` for ``i != j``."""
    n = int(n)
    if n < 2:
        raise InvalidSizeError(f"curie_weiss needs n >= 2, got {n}")
    mat = np.full((n, n), 1.0 / n)
    np.fill_diagonal(mat, 0.0)
    return CouplingMatrix(mat, kind="curie_weiss")


def _edges_from(adjacency, n=None):
    """Normalize graph-like input to ``(n, ndarray of unique i<j pairs)``."""
    if isinstance(adjacency, LabeledGraph):
        return adjacency.n, np.asarray(adjacency.edges, dtype=np.int64).reshape(-1, 2)
    if sp.issparse(adjacency) or (isinstance(adjacency, np.ndarray) and adjacency.ndim == 2
                                  and adjacency.shape[0] == adjacency.shape[1]
                                  and adjacency.shape[1] != 2):
        coo = sp.triu(sp.coo_array(adjacency), k=1).tocoo()
        keep = coo.data != 0
        pairs = np.column_stack([coo.row[keep], coo.col[keep]])
        return adjacency.shape[0], pairs
    pairs = np.asarray(list(adjacency) if not isinstance(adjacency, np.ndarray) else adjacency,
                       dtype=np.int64).reshape(-1, 2)
    if n is None:
        n = int(pairs.max()) + 1 if len(pairs) else 0
    if len(pairs) and (pairs.min() < 0 or pairs.max() >= n):
        raise InvalidParameterError("edge endpoint outside 0..n-1")
    if np.any(pairs[:, 0] == pairs[:, 1]):
        raise InvalidParameterError("self-loops are not allowed")
    pairs = np.sort(pairs, axis=1)
    pairs = np.unique(pairs, axis=0)
    return int(n), pairs


def _from_pairs(n, pairs, weight, kind):
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    data = np.full(len(rows), float(weight))
    mat = sp.csr_array((data, (rows, cols)), shape=(n, n))
    return CouplingMatrix(mat, kind=kind)


def regular_scaled(adjacency, d: int, n: int | None = None) -> CouplingMatrix:
    """Adjacency of a ``d``-regular graph divided by ``d``.

    ``adjacency`` may be a :class:`LabeledGraph`, a square adjacency matrix,
    or an iterable of 0-based ``(u, v)`` pairs (pass ``n`` if some vertices
    would otherwise be missing).
    """
    d = int(d)
    if d < 1:
        raise InvalidParameterError(f"degree must be positive, got {d}")
    n, pairs = _edges_from(adjacency, n)
    deg = np.bincount(pairs.ravel(), minlength=n)
    bad = np.flatnonzero(deg != d)
    if bad.size:
        v = int(bad[0])
        raise DegreeMismatchError(v, int(deg[v]), d)
    return _from_pairs(n, pairs, 1.0 / d, "regular_scaled")


def circulant_regular(n: int, d: int) -> CouplingMatrix:
    """``regular_scaled`` on the circulant graph joining ``i`` to ``i +- 1..d/2``."""
    n, d = int(n), int(d)
    if d % 2 or d < 2 or d >= n:
        raise InvalidParameterError(f"circulant graph needs even 2 <= d < n, got d={d}")
    base = np.arange(n)
    pairs = np.concatenate([np.column_stack([base, (base + k) % n]) for k in range(1, d // 2 + 1)])
    return regular_scaled(pairs, d, n=n)


def er_edges(n: int, p: float, seed=None) -> np.ndarray:
    """Sample G(n, p) edges as an ``(m, 2)`` array of pairs ``i < j``."""
    n = int(n)
    if not (0 < p <= 1):
        raise InvalidParameterError(f"edge probability must lie in (0, 1], got {p}")
    if n < 2:
        raise InvalidSizeError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    chunks = []
    for i in range(n - 1):
        hit = np.flatnonzero(rng.random(n - i - 1) < p)
        if hit.size:
            chunks.append(np.column_stack([np.full(hit.size, i), hit + i + 1]))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(chunks).astype(np.int64)


def er_scaled(n: int, p: float, seed=None) -> CouplingMatrix:
    """Erdős–Rényi adjacency scaled by ``1/(n p)``; deterministic given ``seed``."""
    pairs = er_edges(n, p, seed)
    return _from_pairs(int(n), pairs, 1.0 / (n * p), "er_scaled")


def block_example(n: int) -> CouplingMatrix:
    """Two Curie–Weiss-like blocks on ``n/2`` and ``sqrt(n)`` spins.

    Entries are ``1/n`` inside the first block, ``1/sqrt(n)`` inside the
    second, zero elsewhere.
    """
    n = int(n)
    r = math.isqrt(n)
    if n < 4 or n % 2 or r * r != n:
        raise InvalidSizeError(f"block_example needs even perfect-square n >= 4, got {n}")
    h = n // 2
    mat = np.zeros((n, n))
    mat[:h, :h] = 1.0 / n
    mat[h:h + r, h:h + r] = 1.0 / r
    np.fill_diagonal(mat, 0.0)
    return CouplingMatrix(mat, kind="block")


# ---------------------------------------------------------------------------
# Labeled graphs from edge-list files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph with a +-1 label per node.

    ``edges`` are 0-based index pairs ``(i, j)`` with ``i < j``;
    ``node_ids[i]`` is the original identifier of node ``i``.
    """

    node_ids: tuple
    edges: tuple
    labels: np.ndarray = field(repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        if labels.shape != (len(self.node_ids),):
            raise InvalidParameterError("one label per node required")
        if not np.all(np.abs(labels) == 1):
            raise InvalidParameterError("labels must be -1 or +1")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        return np.bincount(e.ravel(), minlength=self.n)

    def coupling(self) -> CouplingMatrix:
        """Adjacency scaled by ``1/n``: the dense-graph statistic ``tau'A tau / n``."""
        if self.n < 1:
            raise InvalidSizeError("graph has no nodes")
        pairs = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        return _from_pairs(self.n, pairs, 1.0 / self.n, "custom")

    def permuted(self, perm) -> "LabeledGraph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(len(perm))
        ids = tuple(self.node_ids[k] for k in inv)
        edges = tuple(sorted(tuple(sorted((int(perm[i]), int(perm[j])))) for i, j in self.edges))
        return LabeledGraph(ids, edges, self.labels[inv])


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def _parse_id(tok, lineno, source):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"node id {tok!r} is not an integer", lineno, source) from None


def parse_labels(text: str, source: str | None = "labels") -> dict:
    """Parse ``"id value"`` lines; values in {-1, 1} or {0, 1} (0 means -1)."""
    raw = {}
    where = {}
    for lineno, toks in _data_lines(text):
        if len(toks) != 2:
            raise ParseError(f"expected 'id label', got {len(toks)} fields", lineno, source)
        u = _parse_id(toks[0], lineno, source)
        try:
            v = int(float(toks[1]))
            if float(toks[1]) != v:
                raise ValueError
        except ValueError:
            raise ParseError(f"label {toks[1]!r} is not an integer", lineno, source) from None
        if v not in (-1, 0, 1):
            raise ParseError(f"label {v} not in {{-1, 0, 1}}", lineno, source)
        if u in raw and raw[u] != v:
            raise ParseError(f"conflicting labels for node {u}", lineno, source)
        raw[u] = v
        where[u] = lineno
    values = set(raw.values())
    if -1 in values and 0 in values:
        u = next(k for k, v in raw.items() if v == 0)
        raise ParseError("labels mix the {-1, 1} and {0, 1} alphabets", where[u], source)
    return {u: (1 if v == 1 else -1) for u, v in raw.items()}


def from_edge_list(edges_text: str, labels_text: str, *, edges_source="edges",
                   labels_source="labels"):
    """Parse an edge list and label file into a graph and its ``1/n`` coupling.

    Node ids are remapped to ``0..n-1`` by first appearance in the edges
    text; labeled nodes that never appear in an edge follow in label-file
    order.  Duplicate (or reversed duplicate) edges are collapsed.

    Returns
    -------
    (LabeledGraph, CouplingMatrix)
    """
    labels = parse_labels(labels_text, labels_source)
    index = {}
    seen = set()
    edges = []
    for lineno, toks in _data_lines(edges_text):
        if len(toks) != 2:
            raise ParseError(f"expected 'u v', got {len(toks)} fields", lineno, edges_source)
        u = _parse_id(toks[0], lineno, edges_source)
        v = _parse_id(toks[1], lineno, edges_source)
        if u == v:
            raise ParseError(f"self-loop on node {u}", lineno, edges_source)
        for w in (u, v):
            if w not in labels:
                raise ParseError(f"node {w} has no label", lineno, edges_source)
            if w not in index:
                index[w] = len(index)
        a, b = sorted((index[u], index[v]))
        if (a, b) not in seen:
            seen.add((a, b))
            edges.append((a, b))
    for w in labels:
        if w not in index:
            index[w] = len(index)
    ids = tuple(index)
    graph = LabeledGraph(ids, tuple(edges), np.array([labels[w] for w in ids], dtype=np.int8))
    return graph, graph.coupling()


def read_edge_list(edges_path, labels_path):
    edges_path, labels_path = Path(edges_path), Path(labels_path)
    return from_edge_list(edges_path.read_text(), labels_path.read_text(),
                          edges_source=str(edges_path), labels_source=str(labels_path))


# ---------------------------------------------------------------------------
# Spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Eigenvalue summary of a coupling matrix.

    ``eigenvalues`` is sorted descending.  When ``partial`` is true only the
    dominant eigenvalue (by magnitude, from power iteration) is known.
    """

    eigenvalues: np.ndarray
    frobenius_norm_sq: float
    operator_norm: float
    partial: bool = False

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[0]) if len(self.eigenvalues) else 0.0


def power_iteration(cmat: CouplingMatrix, tol=POWER_TOL, maxiter=POWER_MAXITER, seed=0):
    """Operator norm ``max |lambda|`` and the signed Rayleigh quotient."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(cmat.n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(maxiter):
        w = cmat.matvec(v)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0, 0.0
        # two steps of J cancel sign oscillation for +-lambda pairs
        w2 = cmat.matvec(w / norm)
        new = math.sqrt(float(np.linalg.norm(w2)) * norm)
        v = w2 / np.linalg.norm(w2)
        if abs(new - est) <= tol * max(1.0, new):
            est = new
            break
        est = new
    rayleigh = float(v @ cmat.matvec(v))
    return est, rayleigh


def spectrum(cmat: CouplingMatrix, dense_cap: int = DENSE_EIG_CAP) -> Spectrum:
    """Full sorted spectrum up to ``dense_cap`` spins, else the operator norm only."""
    if cmat.n <= dense_cap:
        vals = np.linalg.eigvalsh(cmat.toarray())[::-1].copy()
        vals.setflags(write=False)
        return Spectrum(vals, cmat.frobenius_norm_sq, float(np.max(np.abs(vals))), False)
    norm, rq = power_iteration(cmat)
    lead = norm if rq >= 0 else -norm
    vals = np.array([lead])
    vals.setflags(write=False)
    return Spectrum(vals, cmat.frobenius_norm_sq, norm, True)


def coupling_from_pairs(n: int, pairs: Sequence | Iterable, weight: float, kind="custom"):
    """Build an unweighted-graph coupling with constant ``weight`` on each edge."""
    n, arr = _edges_from(pairs, n)
    return _from_pairs(n, arr, weight, kind)
