import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coarse_cancel.coneoff import FamilyStats
from coarse_cancel.errors import HypothesisFailure, InvalidInput, UnsoundLedger
from coarse_cancel.invariants import build_ledger
from coarse_cancel.smallcancel import (
    Constants,
    certify_small_cancellation,
    check_induction_hypotheses,
    choose_n1,
    critical_exponent_n0,
    exponent_checks,
    kappa_log,
    kappa_mcg_style,
    lambda_n,
    log_critical_exponent_n0,
    log_lambda_n,
    propagate_ledger,
    log_rinj_threshold,
    quotient_iteration_trace,
    rescale_for_induction,
    rescale_ledger,
    trivialization_step,
)

import oracles

TOY = Constants.default_toy()
# smallest admissible exponent for the toy constants with nu0 = 2, cross-checked below
TOY_N0 = 1198202845


def mp_consts(c):
    return dict(L_S=mpmath.mpf(c.L_S), rho0=mpmath.mpf(c.rho0), delta1=mpmath.mpf(c.delta1))


@given(st.integers(1, 10 ** 12))
@settings(max_examples=100, deadline=None)
def test_lambda_halves_when_n_quadruples(n):
    assert log_lambda_n(n, TOY) - log_lambda_n(4 * n, TOY) == pytest.approx(math.log(2), abs=1e-12)


@pytest.mark.parametrize("n", [1, 101, 10 ** 9 + 7])
def test_lambda_matches_mpmath(n):
    expected = oracles.lambda_n(n, **mp_consts(TOY))
    assert lambda_n(n, TOY).value == pytest.approx(float(expected), rel=1e-12)


def test_lambda_rejects_small_n():
    with pytest.raises(InvalidInput):
        log_lambda_n(0, TOY)


def test_toy_n0_is_minimal_against_oracle():
    assert critical_exponent_n0(TOY, 2) == TOY_N0
    args = dict(nu0=2, L_S=mpmath.mpf(500), delta0=mpmath.mpf("0.01"), Delta0=mpmath.mpf(1),
                rho0=mpmath.mpf(5), delta1=mpmath.mpf("0.001"))
    assert all(oracles.induction_inequalities(TOY_N0, **args))
    assert not all(oracles.induction_inequalities(TOY_N0 - 1, **args))
    assert all(c.passed for c in exponent_checks(TOY_N0, TOY, 2))
    assert not all(c.passed for c in exponent_checks(TOY_N0 - 1, TOY, 2))


def test_n0_binding_constraint_is_named():
    _, binding = log_critical_exponent_n0(TOY, 2)
    assert binding.startswith("lambda ((nu0+5)")


@given(st.floats(1.0, 50.0))
@settings(max_examples=20, deadline=None)
def test_n0_monotone_when_delta0_relaxed(factor):
    tight = Constants(1.0, 500.0, 1e-6, 1.0, 5.0, 0.001, True)
    loose = Constants(1.0, 500.0, 1e-6 * factor, 1.0, 5.0, 0.001, True)
    assert critical_exponent_n0(loose, 2) <= critical_exponent_n0(tight, 2)


def test_canonical_n0_is_out_of_reach():
    canon = Constants.canonical()
    log_n, binding = log_critical_exponent_n0(canon, 2)
    assert log_n > 1e22
    with pytest.raises(HypothesisFailure, match="binding"):
        critical_exponent_n0(canon, 2)


def test_canonical_constants_validated():
    with pytest.raises(InvalidInput):
        Constants(1.0, 500.0, 1.0, 1.0, 5.0, 64e4, False)
    with pytest.raises(InvalidInput):
        Constants.from_json({"mode": "canonical", "rho0": 1})
    with pytest.raises(InvalidInput):
        Constants.from_json({"mode": "weird"})
    assert Constants.from_json(TOY.to_json()) == TOY


def test_certify_small_cancellation():
    rho = TOY.rho0
    ok = certify_small_cancellation(0.0, rho, FamilyStats(0.5, 8 * math.pi * math.sinh(rho), {}), TOY)
    assert ok.overall
    bad = certify_small_cancellation(0.0, rho, FamilyStats(0.5, 8 * math.pi * math.sinh(rho) * 0.99, {}), TOY)
    assert bad.failed() == ["8 pi sinh rho <= TQ"]
    with pytest.raises(InvalidInput):
        certify_small_cancellation(0.0, 0.0, FamilyStats(0, 1, {}), TOY)


@pytest.fixture(scope="module")
def toy_ledger(z3z5):
    return build_ledger(z3z5[1])


def test_free_product_ledger_passes_induction(toy_ledger):
    report = check_induction_hypotheses(toy_ledger, TOY_N0, TOY_N0, TOY, n0=TOY_N0)
    assert report.overall, report.failed()
    even = check_induction_hypotheses(toy_ledger, TOY_N0, TOY_N0 + 1, TOY)
    assert "n odd" in even.failed()


def test_unsound_flags_refused(toy_ledger):
    with pytest.raises(UnsoundLedger):
        check_induction_hypotheses(toy_ledger.replace(flags={"rinj": "upper"}), TOY_N0, TOY_N0, TOY)
    with pytest.raises(UnsoundLedger):
        check_induction_hypotheses(toy_ledger.replace(flags={"A": "lower"}), TOY_N0, TOY_N0, TOY)


def test_propagation_adds_exact_A_increment(toy_ledger):
    nxt = propagate_ledger(toy_ledger, TOY, TOY_N0)
    increment = (toy_ledger.nu + 4) * math.pi * math.sinh(2 * TOY.L_S * TOY.delta1)
    assert nxt.A.value - toy_ledger.A.value == pytest.approx(increment, rel=1e-12)
    assert nxt.A.value == pytest.approx(6 * math.pi * math.sinh(1.0), rel=1e-12)
    assert nxt.flags["e"] == "divides" and nxt.nu <= toy_ledger.nu


def test_propagated_rinj_follows_cone_radius_rule(toy_ledger):
    nxt = propagate_ledger(toy_ledger, TOY, TOY_N0)
    lam = oracles.lambda_n(TOY_N0, **mp_consts(TOY))
    kappa = 2 * mpmath.mpf(5) / (mpmath.pi * mpmath.sinh(5))
    expected = min(kappa * lam * 500 * mpmath.mpf("0.001") / 2 / 8, mpmath.mpf("0.001"))
    assert nxt.rinj.value == pytest.approx(float(expected), rel=1e-10)
    assert kappa_log(TOY, "quotient_delta") != kappa_log(TOY)
    with pytest.raises(InvalidInput):
        kappa_log(TOY, "other")


def test_propagation_refuses_failing_ledger(toy_ledger):
    with pytest.raises(HypothesisFailure):
        propagate_ledger(toy_ledger.replace(nu=99), TOY, TOY_N0, nu0=2)


def test_five_step_trace(toy_ledger):
    trace = quotient_iteration_trace(toy_ledger, TOY_N0, 5, TOY, l0=8.0)
    assert trace.failure is None and len(trace.ledgers) == 6
    lam = float(oracles.lambda_n(TOY_N0, **mp_consts(TOY)))
    assert trace.lam.value == pytest.approx(lam, rel=1e-12)
    assert lam == pytest.approx(0.038559, rel=1e-4)
    # geometric decay of a stable length l0 under repeated contraction
    lengths = [8.0 * trace.lam.value ** k for k in range(6)]
    assert all(b / a == pytest.approx(lam, rel=1e-12) for a, b in zip(lengths, lengths[1:]))
    threshold = math.exp(log_rinj_threshold(TOY_N0, TOY))
    expected = math.ceil(math.log(8.0 / threshold) / math.log(1 / lam))
    assert trace.trivialization == expected == 4


def test_trace_stops_at_first_failure(toy_ledger):
    trace = quotient_iteration_trace(toy_ledger, TOY_N0 + 1, 3, TOY)
    assert trace.failure == "n odd" and len(trace.ledgers) == 1
    with pytest.raises(InvalidInput):
        quotient_iteration_trace(toy_ledger, TOY_N0, -1, TOY)


def test_trivialization_step_is_strict():
    assert trivialization_step(0.5, 8.0, 1.0) == 4
    assert trivialization_step(0.5, 9.0, 1.0) == 4
    assert trivialization_step(0.5, 0.5, 1.0) == 0
    with pytest.raises(InvalidInput):
        trivialization_step(1.0, 8.0, 1.0)


@given(st.floats(0.01, 0.99), st.floats(0.01, 1e6), st.floats(0.01, 10.0))
@settings(max_examples=100, deadline=None)
def test_trivialization_step_is_smallest(lam, l0, rinj):
    k = trivialization_step(lam, l0, rinj)
    assert lam ** k * l0 < rinj * (1 + 1e-12)
    if k > 0:
        assert lam ** (k - 1) * l0 >= rinj * (1 - 1e-12)


def test_rescaling(toy_ledger):
    big = toy_ledger.replace(delta=2.0, A=100.0)
    scaled = rescale_ledger(big, 0.5)
    assert scaled.delta == 1.0 and scaled.A.value == pytest.approx(50.0) and scaled.rinj.value == pytest.approx(1.0)
    fitted, factor = rescale_for_induction(big, TOY, 2)
    assert fitted.delta <= TOY.delta1 * (1 + 1e-12) and factor < 1
    with pytest.raises(InvalidInput):
        rescale_ledger(big, 0.0)


def exact_n1(rinj):
    c = mp_consts(TOY)
    need = 2 * c["L_S"] * mpmath.sinh(c["rho0"]) * c["delta1"] ** 2 / (mpmath.sinh(38 * c["delta1"]) * rinj ** 2)
    return int(mpmath.ceil(need))


def test_choose_n1(toy_ledger):
    assert choose_n1(toy_ledger, TOY, TOY_N0) == TOY_N0
    # representable range: exactly the smallest admissible integer
    mid = toy_ledger.replace(rinj=5e-4)
    n1 = choose_n1(mid, TOY, 1)
    assert n1 == exact_n1(mpmath.mpf(5e-4))
    assert log_rinj_threshold(n1, TOY) <= mid.rinj.log
    # beyond double resolution: admissible and within a relative 1e-11
    tiny = toy_ledger.replace(rinj=1e-9)
    n1 = choose_n1(tiny, TOY, TOY_N0)
    exact = exact_n1(mpmath.mpf(1e-9))
    assert n1 >= exact and (n1 - exact) / exact < 1e-11
    assert log_rinj_threshold(n1, TOY) <= tiny.rinj.log


def test_kappa_mcg():
    assert kappa_mcg_style(6, 4) == 12
    with pytest.raises(InvalidInput):
        kappa_mcg_style(0, 4)
