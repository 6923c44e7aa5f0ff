import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isinginfer import (
    CouplingMatrix,
    DegreeMismatchError,
    InvalidParameterError,
    InvalidSizeError,
    ParseError,
    block_example,
    circulant_regular,
    curie_weiss,
    er_edges,
    er_scaled,
    from_edge_list,
    read_edge_list,
    regular_scaled,
    spectrum,
)

from .oracles import cycle_pairs


def _labels(ids, value=1):
    return "".join(f"{i} {value}\n" for i in ids)


# --- constructors ------------------------------------------------------------

def test_curie_weiss_small():
    cmat = curie_weiss(2).toarray()
    assert cmat.tolist() == [[0.0, 0.5], [0.5, 0.0]]
    cmat3 = curie_weiss(3).toarray()
    off = cmat3[~np.eye(3, dtype=bool)]
    assert np.all(off == 1 / 3) and np.all(np.diag(cmat3) == 0)


def test_curie_weiss_operator_norm():
    assert spectrum(curie_weiss(10)).operator_norm == pytest.approx(0.9, abs=1e-12)


def test_regular_four_cycle():
    cmat = regular_scaled(cycle_pairs(4), 2).toarray()
    for i in range(4):
        assert cmat[i, (i + 1) % 4] == 0.5 and cmat[i, (i - 1) % 4] == 0.5
        assert cmat[i, (i + 2) % 4] == 0.0


def test_regular_complete_graph():
    n = 7
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    cmat = regular_scaled(pairs, n - 1).toarray()
    assert np.allclose(cmat[~np.eye(n, dtype=bool)], 1 / (n - 1), rtol=0, atol=0)


def test_regular_six_cycle_norm():
    assert spectrum(regular_scaled(cycle_pairs(6), 2)).operator_norm == pytest.approx(1.0, abs=1e-12)


def test_regular_degree_mismatch():
    with pytest.raises(DegreeMismatchError) as info:
        regular_scaled([(0, 1), (1, 2)], 2)
    assert info.value.vertex == 0 and info.value.degree == 1


def test_circulant_is_regular():
    cmat = circulant_regular(30, 6)
    adj = cmat.toarray() * 6
    assert np.all(adj.sum(axis=1) == 6)
    with pytest.raises(InvalidParameterError):
        circulant_regular(10, 3)


@pytest.mark.parametrize("n", [2, 5, 40])
def test_er_with_p_one_is_curie_weiss(n):
    assert er_scaled(n, 1.0, seed=3) == curie_weiss(n)
    assert np.array_equal(er_scaled(n, 1.0, seed=3).toarray(), curie_weiss(n).toarray())


def test_er_edge_count():
    n, p = 1000, 0.2
    local = len(er_edges(n, p, seed=7))
    pairs = n * (n - 1) / 2
    assert abs(local - pairs * p) <= 4 * math.sqrt(pairs * p * (1 - p))


def test_er_operator_norm_near_one():
    assert abs(spectrum(er_scaled(500, 0.3, seed=11)).operator_norm - 1.0) <= 0.1


def test_er_deterministic_and_sparse_storage():
    a, b = er_scaled(300, 0.1, seed=5), er_scaled(300, 0.1, seed=5)
    assert a == b
    assert er_scaled(300, 0.1, seed=6) != a
    big = er_scaled(1500, 0.01, seed=1)
    assert big.is_sparse
    x = np.random.default_rng(0).standard_normal(1500)
    assert np.allclose(big.matvec(x), big.toarray() @ x, atol=1e-12)


def test_er_bad_p():
    with pytest.raises(InvalidParameterError):
        er_scaled(10, 0.0)
    with pytest.raises(InvalidParameterError):
        er_scaled(10, 1.5)


def test_block_example_small():
    cmat = block_example(4).toarray()
    assert cmat[0, 1] == 0.25 and cmat[2, 3] == 0.5
    assert cmat[0, 2] == 0 and cmat[1, 3] == 0


def test_block_example_frobenius():
    expected = (8 * 7) / 256 + (4 * 3) / 16
    assert block_example(16).frobenius_norm_sq == pytest.approx(expected, rel=1e-14)


def test_block_example_norm():
    assert spectrum(block_example(100)).operator_norm == pytest.approx(0.9, abs=1e-12)


@pytest.mark.parametrize("n", [6, 8, 18])
def test_block_example_rejects_bad_sizes(n):
    with pytest.raises(InvalidSizeError):
        block_example(n)


@pytest.mark.parametrize("make", [
    lambda: curie_weiss(9),
    lambda: regular_scaled(cycle_pairs(9), 2),
    lambda: er_scaled(60, 0.3, seed=2),
    lambda: block_example(64),
])
def test_constructor_invariants(make):
    cmat = make()
    adj = cmat.toarray()
    assert np.array_equal(adj, adj.T)
    assert np.all(np.diag(adj) == 0)
    assert np.all(adj >= 0)
    assert not adj.flags.writeable


def test_validation_rejects_bad_matrices():
    with pytest.raises(ValueError):
        CouplingMatrix([[0, 1], [0.5, 0]])
    with pytest.raises(ValueError):
        CouplingMatrix([[1, 0], [0, 0]])
    with pytest.raises(ValueError):
        CouplingMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        CouplingMatrix([[0, -1], [-1, 0]], kind="curie_weiss")
    assert not CouplingMatrix([[0, -1], [-1, 0]]).nonnegative


# --- spectra -----------------------------------------------------------------

def test_spectrum_closed_forms():
    assert np.allclose(spectrum(curie_weiss(2)).eigenvalues, [0.5, -0.5], atol=1e-15)
    assert np.all(spectrum(CouplingMatrix(np.zeros((4, 4)))).eigenvalues == 0)
    n = 25
    ev = spectrum(curie_weiss(n)).eigenvalues
    assert ev[0] == pytest.approx((n - 1) / n, abs=1e-12)
    assert np.allclose(ev[1:], -1 / n, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 120), p=st.floats(0.05, 1.0), seed=st.integers(0, 2**31))
def test_spectrum_trace_and_frobenius(n, p, seed):
    cmat = er_scaled(n, p, seed=seed)
    spec = spectrum(cmat)
    lam = np.asarray(spec.eigenvalues)
    assert abs(lam.sum()) <= 1e-8 * n
    fro = cmat.frobenius_norm_sq
    assert abs(np.sum(lam ** 2) - fro) <= 1e-8 * max(fro, 1e-300)


def test_spectrum_partial_mode():
    cmat = er_scaled(400, 0.2, seed=4)
    full = spectrum(cmat)
    part = spectrum(cmat, dense_cap=100)
    assert part.partial and not full.partial
    assert part.operator_norm == pytest.approx(full.operator_norm, rel=1e-6)


# --- edge-list ingestion -----------------------------------------------------

def test_path_graph():
    g, cmat = from_edge_list("1 2\n2 3\n", _labels([1, 2, 3]))
    assert g.n == 3 and g.n_edges == 2
    adj = cmat.toarray()
    assert adj[0, 1] == adj[1, 2] == 1 / 3 and adj[0, 2] == 0


def test_duplicate_edges_collapse():
    g, cmat = from_edge_list("1 2\n2 1\n1 2\n", _labels([1, 2]))
    assert g.n_edges == 1 and cmat.nnz == 2


def test_label_alphabets():
    g, _ = from_edge_list("5 7\n", "5 0\n7 1\n")
    assert g.labels.tolist() == [-1, 1]
    g, _ = from_edge_list("5 7\n", "5 -1\n7 1\n")
    assert g.labels.tolist() == [-1, 1]


def test_isolated_labeled_nodes_are_kept():
    g, cmat = from_edge_list("1 2\n", _labels([1, 2, 3]))
    assert g.n == 3 and g.node_ids == (1, 2, 3)
    assert not cmat.toarray()[2].any()


def test_no_edges_is_allowed():
    g, cmat = from_edge_list("", _labels([1, 2]))
    assert g.n == 2 and cmat.nnz == 0


@pytest.mark.parametrize("edges,labels,line", [
    ("1 2\n3 3\n", _labels([1, 2, 3]), 2),
    ("1 2\n2 9\n", _labels([1, 2]), 2),
    ("# header\n1 2 3\n", _labels([1, 2, 3]), 2),
    ("1 x\n", _labels([1]), 1),
])
def test_edge_parse_errors_carry_line_numbers(edges, labels, line):
    with pytest.raises(ParseError) as info:
        from_edge_list(edges, labels)
    assert info.value.line == line
    assert f":{line}:" in str(info.value)


def test_label_parse_errors():
    with pytest.raises(ParseError) as info:
        from_edge_list("1 2\n", "1 0\n2 -1\n")
    assert info.value.line == 1
    with pytest.raises(ParseError) as info:
        from_edge_list("1 2\n", "1 1\n2 5\n")
    assert info.value.line == 2


def _synthetic_network(n_nodes, n_edges, seed):
    rng = np.random.default_rng(seed)
    pairs = set()
    while len(pairs) < n_edges:
        u, v = rng.integers(0, n_nodes, 2)
        if u != v:
            pairs.add((min(u, v), max(u, v)))
    ids = rng.permutation(100_000)[:n_nodes] + 1
    edges = [(int(ids[u]), int(ids[v])) for u, v in sorted(pairs)]
    labels = {int(i): int(rng.integers(0, 2)) for i in ids}
    return edges, labels


def test_fb1_shaped_input(tmp_path):
    edges, labels = _synthetic_network(221, 3176, seed=1)
    (tmp_path / "e.txt").write_text("".join(f"{u} {v}\n" for u, v in edges))
    (tmp_path / "l.txt").write_text("".join(f"{k} {v}\n" for k, v in labels.items()))
    g, cmat = read_edge_list(tmp_path / "e.txt", tmp_path / "l.txt")
    assert (g.n, g.n_edges) == (221, 3176)
    assert cmat.nnz == 2 * 3176
    assert np.allclose(cmat.toarray().sum(), 2 * 3176 / 221)


def test_edge_row_permutation_gives_isomorphic_graph():
    edges, labels = _synthetic_network(40, 120, seed=2)
    ltext = "".join(f"{k} {v}\n" for k, v in labels.items())
    g1, J1 = from_edge_list("".join(f"{u} {v}\n" for u, v in edges), ltext)
    order = np.random.default_rng(3).permutation(len(edges))
    g2, J2 = from_edge_list("".join(f"{edges[k][0]} {edges[k][1]}\n" for k in order), ltext)
    # map g2's indices onto g1's through the original ids
    pos1 = {nid: i for i, nid in enumerate(g1.node_ids)}
    perm = np.array([pos1[nid] for nid in g2.node_ids])
    assert g2.permuted(perm).edges == tuple(sorted(g1.edges))
    assert np.array_equal(g2.permuted(perm).labels, g1.labels)
    A1, A2 = J1.toarray(), J2.toarray()
    assert np.array_equal(A2, A1[np.ix_(perm, perm)])
