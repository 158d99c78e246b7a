import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from prodwave import netgen


def quad_moment(alpha, n, k):
    """E[d^k] of the truncated Pareto by direct integration of the density on [1, n^(1/alpha)]."""
    top = n ** (1.0 / alpha)
    c = alpha / (1.0 - 1.0 / n)
    val, _ = integrate.quad(lambda x: c * x ** (k - alpha - 1.0), 1.0, top, epsrel=1e-12, limit=400,
                            points=np.geomspace(1.0, top, 12)[1:-1])
    return val


@pytest.mark.parametrize("alpha", [1.2, 1.5, 2.0, 2.5, 3.0])
@pytest.mark.parametrize("n", [100, 10**4, 10**6])
def test_moments_match_quadrature(alpha, n):
    m = netgen.degree_moments(alpha, n)
    m1, m2 = quad_moment(alpha, n, 1), quad_moment(alpha, n, 2)
    assert m.mean == pytest.approx(m1, rel=1e-8)
    assert m.second_moment == pytest.approx(m2, rel=1e-8)
    assert m.variance == pytest.approx(m2 - m1 * m1, rel=1e-7)


def test_log_branch_at_alpha_two():
    # second moment at alpha = 2 is ln(n) / (1 - 1/n)
    n = 5000
    m = netgen.degree_moments(2.0, n)
    assert m.second_moment == pytest.approx(math.log(n) / (1 - 1 / n), rel=1e-14)
    near = netgen.degree_moments(2.0 + 1e-7, n)
    assert near.second_moment == pytest.approx(m.second_moment, rel=1e-5)


def test_untruncated_limit():
    m = netgen.degree_moments(3.0, math.inf)
    assert m.mean == pytest.approx(1.5)
    assert m.second_moment == pytest.approx(3.0)
    assert netgen.degree_moments(1.5, math.inf).variance == math.inf
    big = netgen.degree_moments(3.0, 1e15)
    assert big.mean == pytest.approx(1.5, rel=1e-9)
    assert big.psi_alpha == pytest.approx(1.0, rel=1e-9)


def test_truncation_factor_is_below_one():
    m = netgen.degree_moments(1.5, 1000)
    assert 0 < m.psi_alpha < 1
    assert m.mean == pytest.approx(m.psi_alpha * 1.5 / 0.5)


@pytest.mark.parametrize("n,alpha,expected", [(100, 2.0, 10), (1000, 3.0, 10), (1000, 1.5, 100), (999, 1.5, 99), (27, 3.0, 3)])
def test_degree_cutoff_exact_powers(n, alpha, expected):
    assert netgen.degree_cutoff(n, alpha) == expected


@given(n=st.integers(2, 400), alpha=st.floats(1.05, 4.0), seed=st.integers(0, 2**32 - 1))
def test_sampled_degrees_respect_cutoff(n, alpha, seed):
    ds = netgen.sample_degrees(n, alpha, seed)
    assert ds.degrees.min() >= 1
    assert ds.degrees.max() <= ds.d_max == netgen.degree_cutoff(n, alpha)
    assert np.array_equal(ds.degrees, netgen.sample_degrees(n, alpha, seed).degrees)


def test_sampler_follows_floored_pareto_law():
    # P(d >= k) for the floored, cutoff-renormalized Pareto is (k^-a - c^-a) / (1 - c^-a), c = d_max + 1
    n, alpha = 200_000, 1.5
    ds = netgen.sample_degrees(n, alpha, 9)
    c = ds.d_max + 1
    for k in (1, 2, 5, 20):
        want = (k**-alpha - c**-alpha) / (1 - c**-alpha)
        got = np.mean(ds.degrees >= k)
        assert got == pytest.approx(want, abs=4 * math.sqrt(want * (1 - want) / n) + 1e-12)


def test_alpha_must_exceed_one():
    with pytest.raises(netgen.NetworkError, match="alpha must be > 1"):
        netgen.sample_degrees(100, 0.9, 0)
    with pytest.raises(netgen.NetworkError):
        netgen.degree_moments(1.0, 100)


@given(n=st.integers(5, 120), alpha=st.floats(1.2, 3.0), beta=st.floats(0.05, 0.95), seed=st.integers(0, 10**6),
       alignment=st.sampled_from(netgen.ALIGNMENTS), gamma_mode=st.sampled_from(netgen.GAMMA_MODES))
def test_random_network_invariants(n, alpha, beta, seed, alignment, gamma_mode):
    net = netgen.random_network(n, alpha, beta, seed, alignment, gamma_mode)
    A = net.dense()
    assert np.all(A >= 0) and np.all(np.diag(A) == 0)
    np.testing.assert_allclose(A.sum(axis=0), 1 - beta, atol=1e-12)
    np.testing.assert_array_equal((A > 0).sum(axis=0), net.degrees.degrees)
    assert net.gamma.min() > 0 and net.gamma.sum() == pytest.approx(1.0)
    assert net.digest() == netgen.random_network(n, alpha, beta, seed, alignment, gamma_mode).digest()


def test_example_network_columns_sum_to_labor_complement():
    net = netgen.random_network(100, 1.5, 0.4, 1)
    np.testing.assert_allclose(np.asarray(net.A.sum(axis=0)).ravel(), 0.6, atol=1e-12)


def test_degree_too_large_for_network():
    ds = netgen.DegreeSequence(np.array([1, 3, 1]), 1.5, 3)
    with pytest.raises(netgen.NetworkError, match="firm 1"):
        netgen.build_share_matrix(ds, 0.5)


def test_validation_rejects_bad_matrices():
    with pytest.raises(netgen.NetworkError, match="firm 1"):
        netgen.ProductionNetwork(np.array([[0, 0.5], [0.5, 0.0]]) * [[1, 0], [1, 1]], 0.5, np.array([0.5, 0.5]))
    with pytest.raises(netgen.NetworkError, match="diagonal"):
        netgen.ProductionNetwork(np.array([[0.5, 0.0], [0.0, 0.5]]), 0.5, np.array([0.5, 0.5]))
    with pytest.raises(netgen.NetworkError, match="gamma"):
        netgen.ProductionNetwork(np.array([[0, 0.5], [0.5, 0.0]]), 0.5, np.array([0.7, 0.7]))


def test_write_ingest_round_trip(tmp_path):
    net = netgen.random_network(40, 2.0, 0.35, 5, gamma_mode="degree-proportional")
    path = netgen.write_network(net, tmp_path / "net.csv")
    back = netgen.ingest_network(path)
    assert back.digest() == net.digest()
    assert netgen.sidecar_path(path).exists()


def test_ingest_reports_row_and_zero_column(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("supplier,buyer,weight\n0,1,0.5\n1,x,0.5\n")
    with pytest.raises(netgen.NetworkError, match="row 3"):
        netgen.ingest_network(p, beta=0.5)
    p.write_text("supplier,buyer,weight\n0,1,0.5\n1,2,0.5\n")
    with pytest.raises(netgen.NetworkError, match="firm 0"):
        netgen.ingest_network(p, beta=0.5, normalize=True)
    p.write_text("supplier,buyer,weight\n1,0,2.0\n0,1,7.0\n")
    net = netgen.ingest_network(p, beta=0.25, normalize=True)
    np.testing.assert_allclose(net.dense(), [[0, 0.75], [0.75, 0]])
