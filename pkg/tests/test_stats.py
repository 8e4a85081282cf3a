import numpy as np
import pytest

from gqm.errors import InvalidMomentsError
from gqm.stats import (
    MomentSet,
    bracket_commutator_constant,
    central_moments,
    commutator_expectation,
    generalized_heisenberg_bound,
    geometric_variance,
    kahler_inequality_terms,
    operator_variance,
    poisson_bracket,
    truncated_oscillator,
)
from gqm.states import ChartPoint, Observable, PureState

SZ2 = Observable(np.diag([0.0, 1.0]).astype(complex))
SPIN = {
    "x": Observable(0.5 * np.array([[0, 1], [1, 0]], dtype=complex)),
    "y": Observable(0.5 * np.array([[0, -1j], [1j, 0]])),
    "z": Observable(0.5 * np.diag([1.0, -1.0]).astype(complex)),
}


class TestGeometricVariance:
    def test_eigenstate_vanishes(self):
        x = ChartPoint(0, [0.0, 0.0])
        assert geometric_variance(SZ2, x) == pytest.approx(0.0, abs=1e-10)

    def test_equal_superposition_quarter(self):
        x = ChartPoint.from_state(PureState([1.0, 1.0]))
        assert geometric_variance(SZ2, x) == pytest.approx(0.25, abs=1e-8)

    def test_matches_operator_variance(self):
        rng = np.random.default_rng(0)
        for dim in (2, 3):
            for _ in range(60):
                f = Observable.random(dim, rng)
                x = ChartPoint(0, rng.uniform(-1, 1, size=2 * (dim - 1)))
                assert geometric_variance(f, x) == pytest.approx(
                    operator_variance(f, x), abs=1e-6
                )


class TestPoissonBracket:
    def test_self_bracket_vanishes(self):
        x = ChartPoint(0, [0.4, 0.1])
        assert poisson_bracket(SPIN["x"], SPIN["x"], x) == pytest.approx(0, abs=1e-9)

    def test_commuting_diagonals_vanish(self):
        f = Observable(np.diag([0.0, 1.0, 2.0]).astype(complex))
        g = Observable(np.diag([3.0, -1.0, 0.5]).astype(complex))
        rng = np.random.default_rng(1)
        for _ in range(10):
            x = ChartPoint(0, rng.uniform(-1, 1, size=4))
            assert poisson_bracket(f, g, x) == pytest.approx(0.0, abs=1e-8)

    def test_antisymmetry(self):
        rng = np.random.default_rng(2)
        f, g = Observable.random(3, rng), Observable.random(3, rng)
        x = ChartPoint(0, rng.uniform(-1, 1, size=4))
        assert poisson_bracket(f, g, x) == pytest.approx(
            -poisson_bracket(g, f, x), abs=1e-9
        )

    def test_calibrated_constant_is_minus_half_hbar(self):
        assert bracket_commutator_constant() == pytest.approx(-0.5, abs=1e-8)

    def test_spin_half_bracket_proportional_to_sz(self):
        x = ChartPoint(0, [0.07, -0.04])  # near the S_z-up state
        bracket = poisson_bracket(SPIN["x"], SPIN["y"], x)
        comm = commutator_expectation(SPIN["x"], SPIN["y"], x.to_state())
        c = bracket_commutator_constant()
        assert bracket == pytest.approx(c * comm, abs=1e-8)
        assert bracket / SPIN["z"].expectation(x.to_state()) == pytest.approx(
            c, abs=1e-6
        )

    def test_constant_is_global(self):
        rng = np.random.default_rng(3)
        c = bracket_commutator_constant()
        for dim in (2, 3, 4):
            for _ in range(15):
                f, g = Observable.random(dim, rng), Observable.random(dim, rng)
                x = ChartPoint(0, rng.uniform(-1, 1, size=2 * (dim - 1)))
                bracket = poisson_bracket(f, g, x)
                comm = commutator_expectation(f, g, x.to_state())
                assert bracket == pytest.approx(c * comm, abs=1e-6 * max(1, abs(comm)))


class TestKahlerInequality:
    def test_equal_arguments_tight_without_omega_term(self):
        rng = np.random.default_rng(4)
        f = Observable.random(3, rng)
        x = ChartPoint(0, rng.uniform(-1, 1, size=4))
        terms = kahler_inequality_terms(f, f, x)
        assert terms.cross_omega == pytest.approx(0.0, abs=1e-9)
        assert terms.lhs == pytest.approx(terms.cross_g ** 2, rel=1e-8)

    def test_holds_on_random_draws(self):
        rng = np.random.default_rng(5)
        for dim in (2, 3, 4):
            for _ in range(40):
                f, g = Observable.random(dim, rng), Observable.random(dim, rng)
                x = ChartPoint(0, rng.uniform(-1, 1, size=2 * (dim - 1)))
                terms = kahler_inequality_terms(f, g, x)
                assert terms.slack > -1e-10
                # dropping the metric cross term leaves the variance bound
                assert terms.lhs >= terms.heisenberg_bound - 1e-10


class TestCentralMoments:
    def test_eigenstate_all_zero(self):
        m = central_moments(SZ2, PureState([1.0, 0.0]))
        assert (m.mu2, m.mu4, m.mu6) == (0.0, 0.0, 0.0)

    def test_bernoulli_half(self):
        m = central_moments(SZ2, PureState([1.0, 1.0]))
        assert m.mu2 == pytest.approx(1 / 4, abs=1e-14)
        assert m.mu4 == pytest.approx(1 / 16, abs=1e-14)
        assert m.mu6 == pytest.approx(1 / 64, abs=1e-14)

    def test_mu2_matches_geometric_variance(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            f = Observable.random(3, rng)
            psi = PureState.random(3, rng)
            m = central_moments(f, psi)
            assert m.mu2 == pytest.approx(
                geometric_variance(f, ChartPoint.from_state(psi)), abs=1e-6
            )

    def test_hankel_positivity_validated(self):
        with pytest.raises(InvalidMomentsError):
            MomentSet(mean=0.0, mu2=1.0, mu4=10.0, mu6=1.0)


class TestGeneralizedBound:
    def test_gaussian_ratios_give_base_bound_exactly(self):
        mu2 = 0.83
        m = MomentSet(mean=0.0, mu2=mu2, mu4=3 * mu2 ** 2, mu6=15 * mu2 ** 3)
        bound = generalized_heisenberg_bound(m)
        assert bound.value == 0.25
        assert not bound.degenerate

    def test_bernoulli_denominator_degenerates(self):
        m = central_moments(SZ2, PureState([1.0, 1.0]))
        bound = generalized_heisenberg_bound(m)
        assert bound.degenerate
        assert bound.value == 0.25

    def test_bound_never_below_base(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            f = Observable.random(4, rng)
            psi = PureState.random(4, rng)
            bound = generalized_heisenberg_bound(central_moments(f, psi))
            assert bound.value >= 0.25

    def test_truncated_oscillator_inequality(self):
        # states concentrated away from the truncation edge obey the
        # moment-corrected bound within the 2% commutator truncation slack
        q, p = truncated_oscillator(12)
        e = np.eye(12)
        states = [
            PureState(e[0].astype(complex)),
            PureState((e[0] + e[1]).astype(complex)),
            PureState((e[0] + e[2]).astype(complex)),
            PureState(np.exp(-0.8 * np.arange(12)).astype(complex)),
        ]
        for psi in states:
            bound = generalized_heisenberg_bound(central_moments(p, psi))
            product = p.variance(psi) * q.variance(psi)
            assert product >= bound.value * (1 - 0.02)

    def test_ground_state_sits_at_equality(self):
        q, p = truncated_oscillator(12)
        psi = PureState(np.eye(12)[0].astype(complex))
        bound = generalized_heisenberg_bound(central_moments(p, psi))
        product = p.variance(psi) * q.variance(psi)
        assert product == pytest.approx(bound.value, rel=1e-10)
