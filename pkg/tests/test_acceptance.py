"""Acceptance criteria 1-13 at their stated scale, one test per criterion.

Each check also prints a PASS/FAIL line in the terminal summary. Run as a
script (``python3 tests/test_acceptance.py``) to get only those lines.
"""
import pytest

from prodwave import acceptance

CFG = acceptance.SuiteConfig(level="full")
LINES = []


@pytest.fixture(scope="module", autouse=True)
def report_lines(pytestconfig):
    yield
    tr = pytestconfig.pluginmanager.getplugin("terminalreporter")
    if tr is not None:
        tr.write_sep("=", "acceptance criteria")
        for line in LINES:
            tr.write_line(line)


@pytest.fixture(scope="module")
def networks():
    return acceptance.criterion_networks(CFG)


def check(results):
    for r in results:
        LINES.append(r.line())
        print(r.line())
    failed = [r.line() for r in results if not r.passed]
    assert not failed, "\n".join(failed)


def test_criterion_01_attenuation_ratio():
    check(acceptance.attenuation_simulation(CFG))


def test_criterion_02_depth_ordering(networks):
    check(acceptance.depth_ordering(CFG, networks))


def test_criterion_03_depth_error(networks):
    check(acceptance.depth_error(CFG, networks))


def test_criterion_04_trace_identities():
    check(acceptance.trace_identities(CFG))


def test_criterion_05_finite_window_law():
    check(acceptance.finite_window_law(CFG))


def test_criterion_06_dominance():
    check(acceptance.dominance(CFG))


def test_criterion_07_micro_equivalence():
    check(acceptance.micro_equivalence(CFG))


def test_criterion_08_tail_amplification():
    check(acceptance.tail_amplification(CFG))


def test_criterion_09_overshooting():
    check(acceptance.overshooting(CFG))


def test_criterion_10_levels_and_increments():
    check(acceptance.levels_increments(CFG))


def test_criterion_11_degree_moments():
    check(acceptance.degree_moment_checks(CFG))


def test_criterion_12_calibration_shares():
    check(acceptance.calibration_shares(CFG))


def test_criterion_13_population_comparison():
    check(acceptance.population_comparison(CFG))


def test_tampered_lambda2_breaks_trace_identity():
    tampered = acceptance.SuiteConfig(level="fast", tamper_lambda2=1e-3)
    ids = {r.id: r.passed for r in acceptance.trace_identities(tampered)}
    assert not ids["4c"]


if __name__ == "__main__":
    acceptance.run_suite(CFG, echo=print)
