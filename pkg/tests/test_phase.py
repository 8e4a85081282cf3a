import numpy as np
import pytest

from gqm.dynamics import HamiltonianFunction
from gqm.phase import (
    Loop,
    angle_difference,
    holonomy_phase,
    holonomy_phase_refined,
    poincare_invariant_check,
    surface_phase,
    wrap_angle,
)
from gqm.projective import chart_symplectic
from gqm.states import ChartPoint, Observable, PureState


def equator_loop(m=24, r=1.0):
    return Loop([
        PureState([1.0, r * np.exp(1j * a)])
        for a in np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    ])


def random_loop(rng, dim, m):
    return Loop([
        PureState(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))
        for _ in range(m)
    ])


class TestLoop:
    def test_closing_duplicate_dropped(self):
        pts = [PureState([1.0, x]) for x in (0.0, 1.0, 1j)]
        loop = Loop(pts + [pts[0]])
        assert len(loop) == 3

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            Loop([PureState([1.0, 0.0]), PureState([1.0, 1.0])])

    def test_orthogonal_neighbours_rejected(self):
        with pytest.raises(ValueError, match="orthogonal"):
            Loop([PureState([1, 0]), PureState([0, 1]), PureState([1, 1])])


class TestHolonomy:
    def test_real_amplitude_loop_is_flat(self):
        loop = Loop([PureState([1.0, 0.2]), PureState([1.0, 0.9]),
                     PureState([2.0, 0.3])])
        assert holonomy_phase(loop) == pytest.approx(0.0, abs=1e-14)

    def test_equator_gives_pi(self):
        for m in (8, 16, 64):
            assert abs(holonomy_phase(equator_loop(m))) == pytest.approx(
                np.pi, abs=1e-12
            )

    def test_orientation_reversal_negates(self):
        rng = np.random.default_rng(0)
        loop = random_loop(rng, 3, 6)
        assert holonomy_phase(loop.reversed()) == pytest.approx(
            -holonomy_phase(loop), abs=1e-14
        )

    def test_refinement_preserves_phase(self):
        # geodesic midpoints add zero-area triangles, so the discrete
        # holonomy is exactly refinement-invariant
        rng = np.random.default_rng(1)
        loop = random_loop(rng, 4, 5)
        beta = holonomy_phase(loop)
        assert holonomy_phase(loop.refined()) == pytest.approx(beta, abs=1e-12)
        beta_ref, refined = holonomy_phase_refined(loop, tol=1e-7)
        assert angle_difference(beta_ref, beta) < 1e-7
        assert len(refined) >= len(loop)

    def test_gauge_invariance_is_exact(self):
        rng = np.random.default_rng(2)
        pts = [PureState(rng.standard_normal(3) + 1j * rng.standard_normal(3))
               for _ in range(6)]
        scaled = [PureState((0.2 + 1.3j) ** k * p.components)
                  for k, p in enumerate(pts)]
        assert holonomy_phase(Loop(pts)) == pytest.approx(
            holonomy_phase(Loop(scaled)), abs=1e-14
        )


class TestSurfacePhase:
    def test_matches_holonomy_mod_2pi(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            loop = random_loop(rng, 3, 7)
            base = PureState.random(3, rng)
            assert angle_difference(
                surface_phase(loop, base), holonomy_phase(loop)
            ) < 1e-6

    def test_base_independence(self):
        rng = np.random.default_rng(4)
        loop = random_loop(rng, 3, 6)
        b1, b2 = PureState.random(3, rng), PureState.random(3, rng)
        assert angle_difference(
            surface_phase(loop, b1), surface_phase(loop, b2)
        ) < 1e-6

    def test_equator_with_pole_base(self):
        beta = surface_phase(equator_loop(64), PureState([1.0, 0.0]))
        assert abs(wrap_angle(beta)) == pytest.approx(np.pi, abs=1e-6)

    def test_degenerate_loop_is_flat(self):
        p = PureState([1.0, 0.3])
        loop = Loop([p, p, p])
        assert surface_phase(loop, PureState([1.0, 0.0])) == pytest.approx(
            0.0, abs=1e-14
        )

    def test_orthogonal_base_rejected(self):
        loop = equator_loop(8)
        base = PureState([1.0, -1.0])  # orthogonal to the phi = 0 point
        with pytest.raises(ValueError, match="orthogonal"):
            surface_phase(loop, base)


class TestPoincareInvariance:
    def test_zero_time_is_exact(self):
        rng = np.random.default_rng(5)
        loop = random_loop(rng, 2, 6)
        h = HamiltonianFunction.linear(Observable.random(2, rng))
        before, after = poincare_invariant_check(loop, h, t=0.0)
        assert angle_difference(before, after) < 1e-14

    def test_linear_flow(self):
        rng = np.random.default_rng(6)
        loop = random_loop(rng, 2, 8)
        h = HamiltonianFunction.linear(Observable.random(2, rng))
        before, after = poincare_invariant_check(loop, h, t=5.0, dt=2e-3)
        assert angle_difference(before, after) < 1e-5

    def test_nonlinear_flow(self):
        # nonlinear transport bends the polygon sides; a dense chart circle
        # keeps the discretization sliver inside the tolerance
        h = HamiltonianFunction.expectation_power(
            Observable(np.diag([0.0, 1.0]).astype(complex)), 2
        )
        angles = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
        circle = Loop([
            PureState([1.0, (0.5 + 0.6 * np.cos(a)) + 1j * (0.2 + 0.6 * np.sin(a))])
            for a in angles
        ])
        before, after = poincare_invariant_check(circle, h, t=2.0, dt=5e-3)
        assert angle_difference(before, after) < 1e-4


class TestLiteralSurfaceIntegral:
    def test_calibration_factor_is_two(self):
        # the literal integral of Omega_ab dx^a wedge dx^b over a polar cap
        # is exactly twice the boundary holonomy (the wedge 1/2 convention);
        # measured here rather than assumed
        theta0 = 1.0
        n_t = n_p = 160
        dts, dps = theta0 / n_t, 2 * np.pi / n_p
        total = 0.0
        for it in range(n_t):
            th = (it + 0.5) * dts
            r = np.tan(th / 2)
            drdth = 0.5 / np.cos(th / 2) ** 2
            for ip in range(n_p):
                ph = (ip + 0.5) * dps
                x = ChartPoint(0, np.array([r * np.cos(ph), r * np.sin(ph)]))
                om = chart_symplectic(x)
                v_th = np.array([drdth * np.cos(ph), drdth * np.sin(ph)])
                v_ph = np.array([-r * np.sin(ph), r * np.cos(ph)])
                total += (v_th @ om @ v_ph) * dts * dps
        boundary = Loop([
            PureState([1.0, np.tan(theta0 / 2) * np.exp(1j * p)])
            for p in np.linspace(0, 2 * np.pi, 128, endpoint=False)
        ])
        ratio = total / holonomy_phase(boundary)
        assert ratio == pytest.approx(2.0, abs=1e-3)
