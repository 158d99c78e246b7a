import numpy as np
import pytest

from prodwave import calibrate as C, netgen


@pytest.fixture(scope="module")
def economy():
    deg = netgen.sample_degrees(800, 1.5, 12)
    gamma = netgen.consumption_weights(800, "degree-proportional", deg)
    return deg.degrees, gamma


def test_table_shapes_and_values():
    t = C.attenuation_table()
    assert len(t.rows) == 7 and t.rows[3].lambda2 == pytest.approx(0.5)
    assert t.rows[3].R == pytest.approx(1 / 6)
    t2 = C.attenuation_table((0.2, 0.5), (0.1, 0.33))
    assert len(t2.to_records()) == 4
    assert t2.rows[1].dynamic_share == pytest.approx(0.33 * 0.64 / 1.2)
    with pytest.raises(ValueError):
        C.attenuation_table((0.0,))


def test_reported_granular_shares():
    fast = C.granular_share(1 / 3, 0.2)
    assert 0.17 <= fast <= 0.19
    assert C.describe_share(fast) == "≈ one-sixth"
    assert C.granular_share(1 / 3, 0.5) <= 0.06
    with pytest.raises(ValueError):
        C.granular_share(0.0, 0.5)


def test_describe_share_words():
    assert C.describe_share(0.5) == "≈ one-half"
    assert C.describe_share(0.01) == "close to zero"
    assert C.describe_share(C.granular_share(1 / 3, 0.5)) == "close to zero"
    assert C.describe_share(0.1) == "≈ one-tenth"
    assert C.describe_share(0.7) == "≈ 0.70"


def test_mappings():
    lin = C.lambda2_mapping({"type": "linear", "intercept": 0.9, "slope": -0.2, "alpha0": 1.0})
    assert lin(2.0) == pytest.approx(0.7)
    tab = C.lambda2_mapping({"type": "table", "points": [[2.0, 0.4], [1.0, 0.8]]})
    assert tab(1.5) == pytest.approx(0.6)
    f = lambda a: 0.5  # noqa: E731
    assert C.lambda2_mapping(f) is f
    with pytest.raises(ValueError):
        C.lambda2_mapping({"type": "spline"})
    with pytest.raises(ValueError):
        C.lambda2_mapping({"type": "table", "points": [[1.0, 0.5]]})


def test_sensitivity_total_matches_direct_difference(economy):
    deg, gamma = economy
    spec = {"type": "linear", "intercept": 0.9, "slope": -0.2, "alpha0": 1.0}
    rep = C.sensitivity_decomposition(1.5, spec, deg, gamma, T=60)
    h = 1e-4
    direct = (C.expected_phi_hat(1.5 + h, spec, deg, gamma, T=60)
              - C.expected_phi_hat(1.5 - h, spec, deg, gamma, T=60)) / (2 * h)
    assert rep.total == pytest.approx(direct, rel=1e-5)
    assert rep.exposure_channel + rep.overlap_channel == rep.total
    # faster mixing at higher alpha lowers the dynamic mean: the overlap channel is positive here
    assert rep.overlap_channel > 0


def test_constant_mapping_has_no_overlap_channel(economy):
    deg, gamma = economy
    with pytest.warns(RuntimeWarning):
        rep = C.sensitivity_decomposition(1.5, lambda a: 0.6, deg, gamma, T=40)
    assert rep.overlap_channel == 0.0
    assert rep.total == rep.exposure_channel


def test_rising_mapping_warns(economy):
    deg, gamma = economy
    with pytest.warns(RuntimeWarning, match="not negative"):
        C.sensitivity_decomposition(1.5, {"type": "linear", "intercept": 0.3, "slope": 0.1}, deg, gamma, T=20)


def test_kink_detector():
    h = 1e-3
    monotone = np.array([[1 + v + v**2] for v in (-h, 0.0, h)])
    assert not C._kinks(*monotone)[1].any()
    crossing = np.array([[abs(v)] for v in (-h, 0.0, h)])
    assert C._kinks(*crossing)[1].all()
    # a smooth extremum trips the first test but its second difference falls fourfold on halving
    s1, flag = C._kinks(*np.array([[v**2] for v in (-h, 0.0, h)]))
    s2, _ = C._kinks(*np.array([[v**2] for v in (-h / 2, 0.0, h / 2)]))
    assert flag.all() and s2[0] == pytest.approx(s1[0] / 4)
    k1, _ = C._kinks(*crossing)
    k2, _ = C._kinks(*np.array([[abs(v)] for v in (-h / 2, 0.0, h / 2)]))
    assert k2[0] == pytest.approx(k1[0] / 2)
