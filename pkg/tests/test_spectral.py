import warnings

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from prodwave import netgen, spectral
from conftest import complete, gapped_network, two_firm


def numpy_transient(net):
    w = np.linalg.eigvals(net.dense())
    order = np.argsort(-np.abs(w), kind="stable")
    return w[order]


def test_two_firm_periodic_pair():
    net = two_firm(0.3)
    with pytest.warns(RuntimeWarning, match="periodic"):
        s = spectral.summarize(net)
    assert s.lambda1 == pytest.approx(0.7, abs=1e-12)
    assert s.lambda2 == pytest.approx(-0.7, abs=1e-10)
    assert not s.lambda2_complex
    v = s.v2_norm / np.linalg.norm(s.v2_norm)
    assert abs(v @ np.array([1, -1]) / np.sqrt(2)) == pytest.approx(1.0, abs=1e-8)
    assert s.u2_norm @ s.v2_norm == pytest.approx(1.0)
    assert s.b == pytest.approx(0.0, abs=1e-8)


def test_complete_graph_tied_transients():
    s = spectral.summarize(complete(4, 0.5))
    assert s.lambda1 == pytest.approx(0.5, abs=1e-12)
    assert s.lambda2 == pytest.approx(-1 / 6, abs=1e-9)
    assert s.lambda2_tied


def test_repeated_perron_root_has_no_gap():
    block = complete(3, 0.5).dense()
    A = np.block([[block, np.zeros((3, 3))], [np.zeros((3, 3)), block]])
    net = netgen.ProductionNetwork(A, 0.5, np.full(6, 1 / 6))
    with pytest.raises(spectral.NoSpectralGapError):
        spectral.summarize(net)


def test_perron_pair_on_random_network(small_net):
    pair = spectral.perron(small_net, strict=False)
    assert pair.lambda1 == pytest.approx(0.6, abs=1e-9)
    np.testing.assert_allclose(pair.u1, 1.0)
    assert pair.u1 @ pair.v1 == pytest.approx(1.0)
    np.testing.assert_allclose(small_net.A @ pair.v1, pair.lambda1 * pair.v1, atol=1e-8)


def test_strict_perron_rejects_firm_without_buyers():
    # firm 2 supplies nobody, so its entry of the right Perron vector is zero
    A = np.array([[0, 0.5, 0.25], [0.5, 0, 0.25], [0, 0, 0]])
    net = netgen.ProductionNetwork(A, 0.5, np.full(3, 1 / 3))
    with pytest.raises(spectral.NotPrimitiveError):
        spectral.perron(net)
    assert not spectral.perron(net, strict=False).primitive


def test_perron_near_repeated_root():
    # two weakly linked 2-cycles put a second root at 0.6 * (1 - 3e-7): lazy power iteration alone would need millions of steps
    e = 1e-7
    M = np.array([[0, 1 - e, 2 * e, 0], [1 - e, 0, 0, 2 * e], [e, 0, 0, 1 - 2 * e], [0, e, 1 - 2 * e, 0]])
    net = netgen.ProductionNetwork(0.6 * M, 0.4, np.full(4, 0.25))
    pair = spectral.perron(net, strict=False)
    assert pair.lambda1 == pytest.approx(0.6, abs=1e-12)
    np.testing.assert_allclose(pair.v1 / pair.v1.sum(), [1 / 3, 1 / 3, 1 / 6, 1 / 6], atol=1e-9)


@given(seed=st.integers(0, 500), n=st.sampled_from([30, 80]), alpha=st.sampled_from([1.3, 2.0, 2.8]))
def test_transient_matches_numpy(seed, n, alpha):
    net = netgen.random_network(n, alpha, 0.4, seed)
    w = numpy_transient(net)
    rest = w[np.abs(w - 0.6) > 1e-6]
    mod = np.abs(rest[0])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tr = spectral.dominant_transient(net)
    except spectral.NoSpectralGapError:
        assert np.count_nonzero(np.abs(w - 0.6) < 1e-6) > 1
        return
    assert tr.lambda2_mod == pytest.approx(mod, rel=1e-6, abs=1e-9)
    if not tr.lambda2_complex:
        lam = tr.lambda2.real
        assert np.min(np.abs(rest - lam)) < 1e-6
        np.testing.assert_allclose(net.A @ tr.v2, lam * tr.v2, atol=1e-6 * np.linalg.norm(tr.v2))
        np.testing.assert_allclose(net.A.T @ tr.u2, lam * tr.u2, atol=1e-6)
    else:
        # the returned plane is invariant under A
        P = tr.v2
        img = net.A @ P
        np.testing.assert_allclose(P @ (P.T @ img), img, atol=1e-6)


def test_complex_pair_refused_by_scalar_reduction():
    net, s = gapped_network(60, 1.5, 0.4, real=False)
    assert s.b is None and s.u2.shape == (60, 2)
    assert s.lambda2_imag != 0
    with pytest.raises(spectral.ComplexModeError, match="network-mode"):
        spectral.twomode_parameters(s)


@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 30))
def test_normalize_pair_properties(seed, n):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(n), rng.standard_normal(n)
    if abs(u @ v) < 1e-3:
        return
    un, vn = spectral.normalize_pair(u, v)
    assert np.linalg.norm(un) == pytest.approx(1.0)
    assert un @ vn == pytest.approx(1.0)
    assert abs(un @ u) == pytest.approx(np.linalg.norm(u))


def test_normalize_pair_rejects_orthogonal():
    with pytest.raises(spectral.DefectivePairError):
        spectral.normalize_pair([1.0, 0.0], [0.0, 1.0])


def test_projection_and_loading():
    u = np.array([0.6, 0.8])
    eps = np.array([[1.0, 2.0], [3.0, -1.0]])
    np.testing.assert_allclose(spectral.project_innovation(u, eps), [3.0, 0.4])
    assert spectral.loading([0.5, 0.5], [2.0, -4.0]) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        spectral.loading([1.0], [1.0, 2.0])


def test_degree_proxy_is_centered_unit_vector():
    deg = netgen.sample_degrees(500, 1.6, 3)
    gamma = netgen.consumption_weights(500, "degree-proportional", deg)
    rep = spectral.degree_proxy(deg, gamma)
    assert rep.u2_proxy.sum() == pytest.approx(0.0, abs=1e-12)
    assert np.linalg.norm(rep.u2_proxy) == pytest.approx(1.0)
    d = deg.degrees.astype(float)
    assert rep.b_alpha == pytest.approx(np.sqrt(500) * gamma @ (d - d.mean()) / d.std())
    with pytest.raises(ValueError):
        spectral.degree_proxy(np.ones(10), np.full(10, 0.1))


def test_log_derivative_split_matches_direct():
    deg = netgen.sample_degrees(2000, 1.7, 4)
    gamma = netgen.consumption_weights(2000, "degree-proportional", deg)
    ld = spectral.log_derivative_b(1.7, deg, gamma)
    assert ld.analytic == pytest.approx(ld.direct, rel=1e-4)
    assert ld.recentering + ld.rescaling == pytest.approx(ld.analytic)
    with pytest.raises(ValueError):
        spectral.log_derivative_b(2.0, deg, gamma)


def test_sparse_and_dense_inputs_agree():
    net, a = gapped_network(50, 1.3, 0.3)
    dense = netgen.ProductionNetwork(net.dense(), net.beta, net.gamma)
    assert isinstance(dense.A, sp.csr_array)
    b = spectral.summarize(dense)
    assert a.lambda2 == pytest.approx(b.lambda2, abs=1e-9)
    lam, bb = spectral.twomode_parameters(a)
    assert lam == a.lambda2 and bb == pytest.approx(net.gamma @ a.v2_norm)
