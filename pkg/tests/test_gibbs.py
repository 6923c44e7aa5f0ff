import math

import numpy as np
import pytest
from scipy import stats

from isinginfer import (
    CapacityError,
    ChainConfig,
    CouplingMatrix,
    curie_weiss,
    er_scaled,
    exact_expectation,
    exact_log_pmf,
    exact_sample,
    glauber_sample,
    glauber_sweep,
    hamiltonian,
    sample_replicates,
)
from isinginfer import _kernels
from isinginfer.gibbs import _Chain, states

from .oracles import brute_states


def _state_index(samples):
    # bit k set <=> spin k is -1, matching states(); independent of enumeration internals
    n = samples.shape[1]
    return ((samples < 0).astype(np.int64) << np.arange(n)).sum(axis=1)


def test_hamiltonian_examples():
    assert hamiltonian(curie_weiss(2), [1, 1]) == 1.0
    assert hamiltonian(CouplingMatrix(np.zeros((3, 3))), [1, -1, 1]) == 0.0
    # complete bipartite couplings: alternating the two sides flips the sign
    adj = np.zeros((4, 4))
    adj[np.ix_([0, 1], [2, 3])] = 0.3
    adj[np.ix_([2, 3], [0, 1])] = 0.3
    cmat = CouplingMatrix(adj)
    assert hamiltonian(cmat, [1, 1, -1, -1]) == pytest.approx(-hamiltonian(cmat, [1, 1, 1, 1]))


def test_hamiltonian_vectorized():
    cmat = er_scaled(30, 0.4, seed=1)
    S = np.where(np.random.default_rng(0).random((7, 30)) < 0.5, 1, -1)
    expected = [s @ cmat.toarray() @ s for s in S]
    assert np.allclose(hamiltonian(cmat, S), expected, atol=1e-12)


def test_states_enumeration_matches_bruteforce_set():
    got = {tuple(r) for r in states(4)}
    assert got == {tuple(int(v) for v in r) for r in brute_states(4)}


def test_exact_pmf_is_normalized_and_matches_bruteforce():
    cmat = curie_weiss(5)
    lp = exact_log_pmf(cmat, 0.8)
    assert np.exp(lp).sum() == pytest.approx(1.0, abs=1e-14)
    S = states(5).astype(float)
    w = np.exp(0.4 * np.einsum("ki,ij,kj->k", S, cmat.toarray(), S))
    assert np.allclose(np.exp(lp), w / w.sum(), atol=1e-14)


def test_exact_sample_uniform_at_beta_zero():
    cmat = er_scaled(4, 0.7, seed=2)
    draws = exact_sample(cmat, 0.0, 32_000, seed=5)
    counts = np.bincount(_state_index(draws), minlength=16)
    assert stats.chisquare(counts).pvalue > 0.001


def test_exact_sample_curie_weiss_two_sites():
    e = math.e
    z = 2 * e + 2 / e
    p_same, p_diff = e / z, (1 / e) / z
    draws = exact_sample(curie_weiss(2), 2.0, 50_000, seed=9)
    idx = _state_index(draws)  # 0 (+,+), 1 (-,+), 2 (+,-), 3 (-,-)
    counts = np.bincount(idx, minlength=4)
    expected = 50_000 * np.array([p_same, p_diff, p_diff, p_same])
    assert stats.chisquare(counts, expected).pvalue > 0.001


def test_exact_sample_gof_and_mean_n3():
    cmat = curie_weiss(3)
    draws = exact_sample(cmat, 1.0, 100_000, seed=11)
    pmf = np.exp(exact_log_pmf(cmat, 1.0))
    counts = np.bincount(_state_index(draws), minlength=8)
    assert stats.chisquare(counts, 100_000 * pmf).pvalue > 0.001
    energy = hamiltonian(cmat, draws)
    exact = exact_expectation(cmat, 1.0)
    assert abs(energy.mean() - exact) <= 4 * energy.std(ddof=1) / math.sqrt(energy.size)


def test_exact_capacity():
    with pytest.raises(CapacityError):
        exact_sample(curie_weiss(21), 0.5, 1)


def test_prob_plus_is_stable():
    assert _kernels.prob_plus(2 * 50.0 * 1.0) >= 1 - 1e-40
    assert _kernels.prob_plus(2 * 50.0 * 1.0) == 1.0
    assert _kernels.prob_plus(-1e6) == 0.0
    assert _kernels.prob_plus(1e6) == 1.0
    assert _kernels.prob_plus(0.0) == 0.5


@pytest.mark.parametrize("beta", [0.3, 0.8, 1.5])
def test_detailed_balance(beta):
    cmat = curie_weiss(8)
    adj = cmat.toarray()
    rng = np.random.default_rng(int(beta * 10))
    for _ in range(100):
        tau = np.where(rng.random(8) < 0.5, 1, -1)
        j = int(rng.integers(8))
        flipped = tau.copy()
        flipped[j] = -tau[j]
        local = adj @ tau
        m_f = adj @ flipped
        # P(sigma_j = s | rest) = prob_plus(2 beta s m_j), m_j unaffected by sigma_j
        p_fwd = _kernels.prob_plus(2 * beta * flipped[j] * local[j])
        p_bwd = _kernels.prob_plus(2 * beta * tau[j] * m_f[j])
        log_ratio = 0.5 * beta * (hamiltonian(cmat, tau) - hamiltonian(cmat, flipped))
        lhs = math.exp(log_ratio) * p_fwd
        assert lhs == pytest.approx(p_bwd, rel=1e-12)


def test_kernel_uses_the_heat_bath_probability():
    cmat = curie_weiss(5)
    beta = 0.9
    sigma = np.array([1, -1, 1, 1, -1], dtype=np.int8)
    local = cmat.matvec(sigma.astype(float))
    p = _kernels.prob_plus(2 * beta * local[2])
    for u, expected in [(p - 1e-9, 1), (p + 1e-9, -1)]:
        s, f = sigma.copy(), local.copy()
        _kernels.heat_bath_dense(np.ascontiguousarray(cmat.toarray()), beta, s, f,
                                 np.array([u]), np.array([2], dtype=np.int64))
        assert s[2] == expected
        assert np.allclose(f, cmat.matvec(s.astype(float)), atol=1e-15)


def test_beta_zero_sweep_is_fair_coin():
    cmat = curie_weiss(200)
    rng = np.random.default_rng(3)
    sigma = np.ones(200, dtype=np.int8)
    ups = 0
    sweeps = 200
    for _ in range(sweeps):
        sigma = glauber_sweep(cmat, 0.0, sigma, rng=rng)
        ups += int((sigma == 1).sum())
    total = 200 * sweeps
    assert abs(ups / total - 0.5) <= 4 * 0.5 / math.sqrt(total)


@pytest.mark.parametrize("dense", [True, False])
def test_maintained_fields_do_not_drift(dense):
    cmat = curie_weiss(60) if dense else er_scaled(1200, 0.02, seed=4)
    rng = np.random.default_rng(1)
    chain = _Chain(cmat, 0.9, np.where(rng.random(cmat.n) < 0.5, 1, -1), rng, "random")
    chain.run(300)
    assert np.max(np.abs(chain.local - cmat.matvec(chain.sigma.astype(float)))) <= 1e-10
    s, f = glauber_sweep(cmat, 0.9, chain.sigma, rng=rng, return_fields=True)
    assert np.max(np.abs(f - cmat.matvec(s.astype(float)))) <= 1e-10


def _batch_se(x, batches=20):
    means = np.array([b.mean() for b in np.array_split(x, batches)])
    return means.std(ddof=1) / math.sqrt(batches)


def test_glauber_mean_energy_matches_enumeration():
    cmat = curie_weiss(10)
    cfg = ChainConfig(burn_in_sweeps=500, thin_sweeps=5, seed=2024)
    energy = hamiltonian(cmat, glauber_sample(cmat, 0.5, 20_000, cfg))
    exact = exact_expectation(cmat, 0.5)
    se = max(_batch_se(energy), energy.std(ddof=1) / math.sqrt(energy.size))
    assert abs(energy.mean() - exact) <= 4 * se


def test_glauber_beta_zero_magnetization():
    n, count = 50, 4000
    draws = glauber_sample(curie_weiss(n), 0.0, count, ChainConfig(burn_in_sweeps=0, thin_sweeps=1, seed=8))
    assert abs(draws.mean()) <= 4 / math.sqrt(n * count)


def test_glauber_random_scan_matches_enumeration():
    cmat = curie_weiss(6)
    cfg = ChainConfig(burn_in_sweeps=100, thin_sweeps=3, scan="random", seed=3)
    energy = hamiltonian(cmat, glauber_sample(cmat, 1.2, 20_000, cfg))
    exact = exact_expectation(cmat, 1.2)
    assert abs(energy.mean() - exact) <= 4 * max(_batch_se(energy), energy.std(ddof=1) / math.sqrt(energy.size))


def test_glauber_determinism():
    cmat = er_scaled(80, 0.2, seed=1)
    cfg = ChainConfig(burn_in_sweeps=20, seed=77)
    a = glauber_sample(cmat, 1.1, 50, cfg)
    b = glauber_sample(cmat, 1.1, 50, cfg)
    assert np.array_equal(a, b)
    c = glauber_sample(cmat, 1.1, 50, ChainConfig(burn_in_sweeps=20, seed=78))
    assert not np.array_equal(a, c)


def test_sample_replicates_paths():
    small = curie_weiss(8)
    a = sample_replicates(small, 0.5, 30, ChainConfig(seed=1))
    assert np.array_equal(a, exact_sample(small, 0.5, 30, seed=1))
    g = sample_replicates(small, 0.5, 5, ChainConfig(burn_in_sweeps=10, seed=1), method="glauber")
    assert g.shape == (5, 8) and set(np.unique(g)) <= {-1, 1}
    big = curie_weiss(30)
    r1 = sample_replicates(big, 0.5, 4, ChainConfig(burn_in_sweeps=10, seed=2))
    r2 = sample_replicates(big, 0.5, 4, ChainConfig(burn_in_sweeps=10, seed=2))
    assert np.array_equal(r1, r2)


def test_all_plus_init_at_low_temperature_stays_magnetized():
    cmat = curie_weiss(100)
    draws = glauber_sample(cmat, 3.0, 10, ChainConfig(burn_in_sweeps=50, init="all_plus", seed=0))
    assert np.all(draws.mean(axis=1) > 0.8)


def test_config_validation():
    with pytest.raises(ValueError):
        ChainConfig(thin_sweeps=0)
    with pytest.raises(ValueError):
        ChainConfig(scan="zigzag")
    with pytest.raises(ValueError):
        glauber_sample(curie_weiss(4), -1.0, 3)
