import numpy as np
import pytest

from sweepsolve.errors import ModulusUnavailable, NoPositiveTau, OutOfRange
from sweepsolve.families import (
    InnerBallCert,
    Modulus,
    PiecewiseFamily,
    RadiusFamily,
    SamplingBudget,
    StaticFamily,
    TranslateFamily,
    build_schedule,
    compute_tau,
    estimate_modulus,
    excess,
    verify_inner_ball,
    validate_analytic_modulus,
    _sampled_omega,
)
from sweepsolve.paths import ConstantPath, LinearPath
from sweepsolve.sets import Ball, BallComplement, HalfSpace

import oracles


def sweep_family(horizon=2.0):
    # C(t) = {x_1 <= 1 - t}
    return TranslateFamily(
        HalfSpace((1.0, 0.0), 1.0), LinearPath((0.0, 0.0), (-1.0, 0.0)), horizon=horizon
    )


def drift_jump_family():
    center = LinearPath((0.0, 0.0), (0.1, 0.0))
    p1 = RadiusFamily(center=center, radius=LinearPath(1.0, -0.4), complement=False, horizon=1.0)
    p2 = RadiusFamily(center=center, radius=LinearPath(1.55, -0.55), complement=False, horizon=2.0)
    return PiecewiseFamily(pieces=((1.0, p1), (2.0, p2)))


def drift_nojump_family():
    center = LinearPath((0.0, 0.0), (0.1, 0.0))
    p1 = RadiusFamily(center=center, radius=LinearPath(1.0, -0.4), complement=False, horizon=1.0)
    p2 = RadiusFamily(center=center, radius=LinearPath(1.15, -0.55), complement=False, horizon=2.0)
    return PiecewiseFamily(pieces=((1.0, p1), (2.0, p2)))


class TestExcess:
    def test_ball_pair_analytic(self):
        est = excess(Ball((0.0, 0.0), 2.0), Ball((0.0, 0.0), 1.0))
        assert est.method == "analytic"
        assert est.lower == 1.0
        witness = est.witness
        assert np.linalg.norm(witness) == pytest.approx(2.0)

    def test_subset_gives_zero(self):
        assert excess(Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0), 2.0)).lower == 0.0

    def test_parallel_halfspaces(self):
        est = excess(HalfSpace((1.0, 0.0), 0.0), HalfSpace((1.0, 0.0), -0.5))
        assert est.lower == 0.5

    def test_ball_formula_against_boundary_oracle(self):
        cases = [((0.0, 0.0), 2.0, (0.5, 0.3), 1.2), ((1.0, -1.0), 0.7, (0.8, -0.6), 0.9)]
        for cA, RA, cB, RB in cases:
            est = excess(Ball(cA, RA), Ball(cB, RB))
            oracle = oracles.ball_excess_boundary_oracle(cA, RA, cB, RB)
            assert est.lower == pytest.approx(oracle, abs=1e-6)

    def test_complement_formula_against_grid_oracle(self):
        cA, RA, cB, RB = (0.0, 0.0), 0.5, (0.3, 0.0), 0.5
        est = excess(BallComplement(cA, RA), BallComplement(cB, RB))
        oracle = oracles.complement_excess_grid_oracle(
            cA, RA, cB, RB, ((-1.5, -1.5), (1.5, 1.5))
        )
        assert est.method == "analytic"
        assert abs(est.lower - oracle) <= 5e-3
        assert est.lower == pytest.approx(0.3)

    def test_asymmetry_witness(self):
        inner, outer = Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0), 2.0)
        assert excess(inner, outer).lower == 0.0
        assert excess(outer, inner).lower == 1.0

    def test_triangle_inequality_on_analytic_triples(self):
        A, B, C = Ball((0.0, 0.0), 1.5), Ball((0.4, 0.0), 1.0), Ball((0.9, 0.2), 0.7)
        eAC = excess(A, C).lower
        eAB = excess(A, B).lower
        eBC = excess(B, C).lower
        assert eAC <= eAB + eBC + 1e-12

    def test_triangle_inequality_on_sampled_triples(self):
        from sweepsolve.sets import Polytope, halfspace
        from sweepsolve.families import translate_shape

        tri = Polytope(
            (halfspace((-1.0, 0.0), 0.0), halfspace((0.0, -1.0), 0.0), halfspace((1.0, 1.0), 1.0)),
            (0.2, 0.2),
        )
        A = tri
        B = translate_shape(tri, np.array([0.1, 0.0]))
        C = translate_shape(tri, np.array([0.2, 0.1]))
        budget = SamplingBudget(count=200, hill_steps=40, seed=9)
        eAC = excess(A, C, budget).lower
        eAB = excess(A, B, budget).lower
        eBC = excess(B, C, budget).lower
        assert excess(A, C, budget).method == "sampled"
        assert eAC <= eAB + eBC + 2e-3

    def test_sampled_lower_bound_is_honest(self):
        A, B = Ball((0.0, 0.0), 2.0), Ball((0.3, 0.1), 1.0)
        exact = excess(A, B).lower
        sampled = excess(A, B, SamplingBudget(count=200, seed=5))
        # force the generic path
        from sweepsolve.families import _sampled_excess

        est = _sampled_excess(A, B, SamplingBudget(count=200, seed=5))
        assert est.lower <= exact + 1e-12
        assert est.lower >= exact - 0.05
        assert B.distance(est.witness) == pytest.approx(est.lower, abs=1e-12)
        assert sampled.method == "analytic"


class TestSlices:
    def test_translate_slice(self):
        fam = TranslateFamily(Ball((0.0, 0.0), 1.0), LinearPath((0.0, 0.0), (1.0, 0.0)), 1.0)
        assert fam.at(0.5) == Ball((0.5, 0.0), 1.0)

    def test_radius_slice(self):
        fam = RadiusFamily(ConstantPath((0.0, 0.0)), LinearPath(1.0, -0.4), False, 1.0)
        assert fam.at(1.0) == Ball((0.0, 0.0), 0.6)

    def test_piecewise_right_continuous_at_jump(self):
        p1 = RadiusFamily(ConstantPath((0.0, 0.0)), LinearPath(1.0, -0.4), False, 1.0)
        p2 = RadiusFamily(ConstantPath((0.0, 0.0)), ConstantPath(1.0), False, 2.0)
        fam = PiecewiseFamily(pieces=((1.0, p1), (2.0, p2)))
        assert fam.at(1.0) == Ball((0.0, 0.0), 1.0)
        assert fam.at(1.0 - 1e-9).radius < 0.61
        # the jump only expands: left slice sits inside the right slice
        assert excess(fam.at(1.0 - 1e-9), fam.at(1.0)).lower == 0.0

    def test_inadmissible_jump_rejected(self):
        p1 = RadiusFamily(ConstantPath((0.0, 0.0)), ConstantPath(1.0), False, 1.0)
        p2 = RadiusFamily(ConstantPath((0.0, 0.0)), ConstantPath(0.5), False, 2.0)
        with pytest.raises(ValueError, match="jump"):
            PiecewiseFamily(pieces=((1.0, p1), (2.0, p2)))

    def test_out_of_range(self):
        fam = sweep_family()
        with pytest.raises(OutOfRange):
            fam.at(2.5)


class TestModulus:
    def test_translate_unit_speed(self):
        fam = sweep_family()
        [(d, w)] = estimate_modulus(fam, [0.25])
        assert (d, w) == (0.25, 0.25)

    def test_static_zero(self):
        fam = StaticFamily(Ball((0.0, 0.0), 1.0), 1.0)
        assert estimate_modulus(fam, [0.1, 0.5]) == [(0.1, 0.0), (0.5, 0.0)]

    def test_jump_contributes_nothing(self):
        jump = drift_jump_family()
        cont = drift_nojump_family()
        deltas = [0.1, 0.25, 0.5]
        est_jump = estimate_modulus(jump, deltas)
        est_cont = estimate_modulus(cont, deltas)
        for (d1, w1), (d2, w2) in zip(est_jump, est_cont):
            assert d1 == d2
            assert abs(w1 - w2) <= 1e-9

    def test_sampled_omega_matches_analytic_for_sweep(self):
        fam = sweep_family()
        sampled = _sampled_omega(fam, 0.25, SamplingBudget(count=32, hill_steps=10))
        assert sampled == pytest.approx(0.25, abs=1e-9)

    def test_sampled_jump_equality(self):
        b = SamplingBudget(count=32, hill_steps=10)
        s_jump = _sampled_omega(drift_jump_family(), 0.25, b)
        s_cont = _sampled_omega(drift_nojump_family(), 0.25, b)
        assert abs(s_jump - s_cont) <= 1e-9

    def test_validate_analytic_modulus(self):
        # 200 random forward pairs per family; sampled excess never exceeds
        # the declared linear modulus beyond a 1e-6 relative allowance.
        for fam in (sweep_family(), drift_jump_family()):
            assert validate_analytic_modulus(fam, pairs=200, seed=2) <= 1e-9

    def test_eps_delta_coupling(self):
        fam = sweep_family()
        sched = build_schedule(fam, 2.0, 0.1, 0.5, 3)
        rng = np.random.default_rng(0)
        for n in range(sched.levels):
            for _ in range(200 // sched.levels):
                s = rng.random() * (2.0 - sched.delta[n])
                t = s + rng.random() * sched.delta[n]
                assert excess(fam.at(s), fam.at(t)).lower < sched.eps[n]


class TestComputeTau:
    def test_linear_modulus_recipe(self):
        omega = Modulus(2.0, True, 1.0, lambda d: d)
        tau = compute_tau(omega, r=1.0, rho0=0.5, rho=0.25)
        # eta = min(0.25, 1) = 0.25; threshold 0.25; tau just below it
        assert tau == pytest.approx(0.25, abs=1e-6)
        assert tau < 0.25

    def test_static_gives_horizon(self):
        omega = Modulus(3.0, True, 0.0, lambda d: 0.0)
        assert compute_tau(omega, r=1.0, rho0=0.5, rho=0.25) == 3.0

    def test_rho_equals_rho0_rejected(self):
        omega = Modulus(1.0, True, 0.0, lambda d: 0.0)
        with pytest.raises(ValueError):
            compute_tau(omega, r=1.0, rho0=0.5, rho=0.5)

    def test_no_positive_tau(self):
        omega = Modulus(1.0, False, None, lambda d: 1.0)
        with pytest.raises(NoPositiveTau):
            compute_tau(omega, r=1.0, rho0=0.5, rho=0.25)


class TestBuildSchedule:
    def test_sweep_deltas_are_half_eps(self):
        fam = sweep_family()
        sched = build_schedule(fam, 2.0, 0.1, 0.5, 3)
        for n, d in enumerate(sched.delta):
            assert d == pytest.approx(0.05 * 2.0**-n, rel=1e-9)
        # convex family: r = inf capped to 1e9 for schedule validation only
        assert sched.r == 1e9

    def test_static_delta_is_horizon(self):
        fam = StaticFamily(Ball((0.0, 0.0), 1.0), 1.0)
        sched = build_schedule(fam, 1.0, 0.1, 0.5, 3)
        assert sched.delta == (1.0, 1.0, 1.0)

    def test_eps0_at_or_above_r_rejected(self):
        fam = RadiusFamily(
            LinearPath((-1.0, 0.0), (1.0, 0.0)), ConstantPath(0.5), True, 2.0
        )
        with pytest.raises(ValueError):
            build_schedule(fam, 2.0, 0.5, 0.5, 3)

    def test_nestedness_and_geometric_eps(self):
        fam = sweep_family()
        sched = build_schedule(fam, 2.0, 0.1, 0.5, 4)
        for n in range(3):
            assert sched.grids[n + 1].refines(sched.grids[n])
            assert sched.eps[n + 1] == pytest.approx(sched.eps[n] * 0.5)
        assert sched.summable

    def test_modulus_unavailable(self):
        class Opaque(StaticFamily):
            def analytic_rate(self):
                return None

            def modulus(self, budget=None):
                return Modulus(self.horizon, False, None, lambda d: 0.5)

        fam = Opaque(Ball((0.0, 0.0), 1.0), 1.0)
        with pytest.raises(ModulusUnavailable):
            build_schedule(fam, 1.0, 0.1, 0.5, 2)


class TestInnerBall:
    def test_persistence_on_shrinking_ball(self):
        fam = RadiusFamily(
            ConstantPath((0.0, 0.0)), LinearPath(1.0, -0.4), False, 1.0, declared_r=2.0
        )
        omega = fam.modulus()
        tau = compute_tau(omega, r=fam.r, rho0=1.0, rho=0.5)
        cert = InnerBallCert((0.0, 0.0), 0.5, 0.0, min(tau, 1.0))
        worst = verify_inner_ball(fam, cert, sphere_samples=100, time_samples=50, seed=4)
        assert worst <= 1e-12

    def test_cert_rejects_empty_window(self):
        with pytest.raises(ValueError):
            InnerBallCert((0.0, 0.0), 0.5, 1.0, 0.0)
