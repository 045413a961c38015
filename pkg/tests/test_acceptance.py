"""Acceptance criteria, one test each, with their runtime limits.

Every test prints a single PASS/FAIL line (visible with ``pytest -s`` or in
the captured output of a failure).
"""

import contextlib
import itertools
import math
import time

import numpy as np

from coarse_cancel.action import acylindricity_table, stable_translation_length, translation_length
from coarse_cancel.cli import dispatch
from coarse_cancel.coneoff import (
    BOLD_DELTA_NUM,
    build_cone,
    build_coneoff,
    default_radii,
    mu,
    mu_array,
    quotient_cone,
    refinement_monotone,
    rotation_displacement,
    verify_sandwich,
)
from coarse_cancel.geodesy import ball, hull, quasi_convexity_constant
from coarse_cancel.grouptheory import AmalgamData, GroupTable, bass_serre_window, group_exponent, holomorph
from coarse_cancel.invariants import build_ledger, invariant_e, verify_overlap_bounds
from coarse_cancel.io import load_space, load_window
from coarse_cancel.metric_core import (
    build_space,
    cycle_graph,
    hyperbolicity_delta,
    metric_axiom_defects,
    random_tree,
    verify_four_point_forms,
)
from coarse_cancel.smallcancel import (
    Constants,
    critical_exponent_n0,
    log_lambda_n,
    log_rinj_threshold,
    propagate_ledger,
    quotient_iteration_trace,
)

import oracles
from conftest import CORPUS, coneoff_instances


@contextlib.contextmanager
def criterion(capsys, number, title, limit):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        with capsys.disabled():
            print(f"\n[{status}] criterion {number:2d}: {title} ({elapsed:.2f} s, limit {limit} s)")


def corpus_spaces():
    return {p.stem: load_space(p) for p in sorted((CORPUS / "spaces").glob("*.json"))}


def test_01_tree_zero_hyperbolicity(capsys):
    with criterion(capsys, 1, "random trees have delta exactly 0", 5):
        rng = np.random.default_rng(20240601)
        for _ in range(10):
            n = int(rng.integers(2, 61))
            assert hyperbolicity_delta(build_space(random_tree(n, rng))).delta == 0.0


def test_02_cycle_hyperbolicity(capsys):
    with criterion(capsys, 2, "delta(C4) = 1 and both four-point forms agree on the corpus", 10):
        assert abs(hyperbolicity_delta(build_space(cycle_graph(4))).delta - 1.0) <= 1e-9
        for name, space in corpus_spaces().items():
            delta = hyperbolicity_delta(space).delta
            assert verify_four_point_forms(space, delta).ok, name


def test_03_ball_and_hull_quasiconvexity(capsys):
    with criterion(capsys, 3, "balls are 2delta- and 2-point hulls 6delta-quasi-convex", 30):
        for name, space in corpus_spaces().items():
            delta = hyperbolicity_delta(space).delta
            radii = sorted(set(np.round(space.dist.ravel(), 9)))
            for c in space.points:
                for r in radii:
                    assert quasi_convexity_constant(space, ball(space, c, r)) <= 2 * delta + 1e-9, (name, c, r)
            for pair in itertools.combinations(space.points, 2):
                assert quasi_convexity_constant(space, hull(space, pair, delta)) <= 6 * delta + 1e-9, (name, pair)


def test_04_translation_length_sandwich(capsys):
    with criterion(capsys, 4, "stable/len sandwich and syllable oracle on amalgam trees", 60):
        for (m, n), radius in (((3, 5), 6), ((3, 3), 5), ((5, 7), 4)):
            _, window = bass_serre_window(AmalgamData.free_product(m, n), radius)
            for word in oracles.all_words("aAbB", 4):
                length = translation_length(window, word).value
                stable = stable_translation_length(window, word).value
                assert stable <= length + 1e-12 and length <= stable + 32 * 0.0 + 1e-12, word
                assert length == oracles.syllable_translation_length(word, m, n), (m, n, word)


def test_05_acylindricity_of_amalgam(capsys):
    with criterion(capsys, 5, "Z/3 * Z/5: N(d) = 1 for d >= 3 at l = 0", 10):
        _, window, _ = load_window(CORPUS / "windows" / "z3z5_r5.json")
        rows = [(d, N) for d, N in acylindricity_table(window, 0.0) if d >= 3]
        assert rows and all(N == 1 for _, N in rows)


def test_06_holomorph_exponents(capsys):
    with criterion(capsys, 6, "holomorph exponents 1, 6, 20 and e = 1 for cyclic loxodromic groups", 10):
        assert group_exponent(holomorph(GroupTable.trivial())) == 1 == oracles.affine_holomorph_exponent(1)
        assert group_exponent(holomorph(GroupTable.cyclic(3))) == 6 == oracles.affine_holomorph_exponent(3)
        assert group_exponent(holomorph(GroupTable.cyclic(5))) == 20 == oracles.affine_holomorph_exponent(5)
        assert invariant_e([GroupTable.trivial()]) == 1


def test_07_mu_and_cone_metric(capsys):
    with criterion(capsys, 7, "mu endpoints, cubic bounds and the C6 cone", 30):
        for rho in (1.0, 2.0, 5.0):
            top = math.pi * math.sinh(rho)
            assert abs(mu(0.0, rho)) <= 1e-9 and abs(mu(top, rho) - 2 * rho) <= 1e-9
            t = np.linspace(0.0, top, 1000)
            m = mu_array(t, rho)
            assert np.all(m <= t + 1e-9)
            assert np.all(m >= t - (1 + 1 / math.sinh(rho) ** 2) * t ** 3 / 24 - 1e-9)
        c6 = build_space(cycle_graph(6))
        cone = build_cone(c6, c6.points, 1.0)
        assert all(v <= 1e-9 for v in metric_axiom_defects(cone.dist).values())
        assert cone.sample_delta() <= 2 * BOLD_DELTA_NUM + 1e-6


def test_08_coneoff_sandwich(capsys):
    with criterion(capsys, 8, "cone-off sandwich and refinement monotonicity on 5 instances", 60):
        instances = coneoff_instances()
        assert len(instances) == 5
        for name, space, family, rho in instances:
            assert verify_sandwich(build_coneoff(space, family, rho)).ok, name
            assert refinement_monotone(space, family, rho, default_radii(rho, 2), default_radii(rho, 8)) <= 1e-9


def test_09_rotation_and_quotient(capsys):
    with criterion(capsys, 9, "rotation displaces by 2r, quotient keeps nearby distances", 30):
        space = build_space(cycle_graph(40))
        cone = build_cone(space, space.points, 0.5, radial_samples=5)
        shift = {str(i): str((i + 10) % 40) for i in range(40)}
        qualifying = 0
        for p in cone.points:
            res = rotation_displacement(cone, shift, p)
            assert res.applicable and abs(res.value - res.expected) <= 1e-9
            qualifying += p.kind != "apex"
        assert qualifying > 0
        group = [{str(i): str((i + 10 * k) % 40) for i in range(40)} for k in range(4)]
        q = quotient_cone(cone, group)
        assert q.qualifying > 0 and q.max_deviation == 0.0


def test_10_certifier_pipeline(capsys):
    with criterion(capsys, 10, "lambda ratio, n0 monotonicity, A increment and 5-step trace", 5):
        toy = Constants.default_toy()
        for n in (1, 7, 10 ** 6, 10 ** 15):
            assert abs(log_lambda_n(n, toy) - log_lambda_n(4 * n, toy) - math.log(2)) <= 1e-12
        tight = critical_exponent_n0(Constants(1.0, 500.0, 1e-6, 1.0, 5.0, 0.001, True), 2)
        loose = critical_exponent_n0(Constants(1.0, 500.0, 1e-5, 1.0, 5.0, 0.001, True), 2)
        assert loose <= tight
        n0 = critical_exponent_n0(toy, 2)
        _, window, _ = load_window(CORPUS / "windows" / "z3z5_r5.json")
        ledger = build_ledger(window)
        nxt = propagate_ledger(ledger, toy, n0)
        increment = (ledger.nu + 4) * math.pi * math.sinh(2 * toy.L_S * toy.delta1)
        assert math.isclose(nxt.A.value - ledger.A.value, increment, rel_tol=1e-12)
        trace = quotient_iteration_trace(ledger, n0, 5, toy, l0=8.0)
        assert trace.failure is None and len(trace.ledgers) == 6
        lam = trace.lam.value
        assert 0 < lam < 1
        lengths = [8.0 * lam ** k for k in range(6)]
        assert all(math.isclose(b / a, lam, rel_tol=1e-12) for a, b in zip(lengths, lengths[1:]))
        rinj = math.exp(log_rinj_threshold(n0, toy))
        assert trace.trivialization == math.ceil(math.log(8.0 / rinj) / math.log(1 / lam))


def test_11_overlap_bounds(capsys):
    with criterion(capsys, 11, "overlap bounds on the amalgam corpus", 60):
        checked = 0
        for name in ("z3z5_r5", "z3z3_r4", "z3z5_mid"):
            _, window, _ = load_window(CORPUS / "windows" / f"{name}.json")
            ledger = build_ledger(window)
            words = window.elements(2)[1:]
            samples = [list(p) for p in itertools.combinations(words, 2)] + [[w] for w in words]
            report = verify_overlap_bounds(window, ledger, samples, strict=False)
            assert report.ok and report.min_margin >= 0, name
            checked += len(report.entries)
        assert checked > 0


def test_12_determinism(capsys):
    with criterion(capsys, 12, "corpus output identical at 1, 4 and 8 workers", 120):
        outputs = {dispatch(["corpus", "builtin", "--threads", str(t), "--seed", "7"]) for t in (1, 4, 8)}
        assert len(outputs) == 1
        code, _ = outputs.pop()
        assert code == 0
