import numpy as np
import pytest

from gqm.entangle import (
    TWO_QUBITS,
    BipartiteSpace,
    Quadric,
    brute_force_delta,
    entanglement_measure,
    maximal_family,
    maximal_manifold_probe,
    nearest_farthest,
    polar_plane,
    polar_point,
    segre_embed,
    segre_minor_residual,
    self_conjugacy_residual,
    singlet_measurement,
    singlet_state,
    singlet_triplet_line,
    triplet_zero_state,
)
from gqm.errors import MaximalEntanglementError, ValidationError
from gqm.projective import geodesic_distance, transition_probability
from gqm.spinors import Spinor, conjugate_spinor
from gqm.states import PureState

Q2 = Quadric.two_qubit()
WORKED = PureState(np.array([2.0, 0.0, 0.0, 1.0], dtype=complex))  # diag(2,1)/sqrt5


def random_state(rng, dim=4):
    return PureState.random(dim, rng)


def random_unitary(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestSegreEmbed:
    def test_basis_product(self):
        out = segre_embed(PureState([1, 0]), PureState([1, 0]))
        assert out == PureState([1, 0, 0, 0])

    def test_plus_minus_product(self):
        out = segre_embed(PureState([1, 1]), PureState([1, -1]))
        np.testing.assert_allclose(out.components, np.array([1, -1, 1, -1]) / 2.0)

    def test_products_lie_on_quadric(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            out = segre_embed(random_state(rng, 2), random_state(rng, 2))
            assert abs(Q2.q_invariant(out)) < 1e-12
            assert segre_minor_residual(out, TWO_QUBITS) < 1e-12

    def test_entangled_state_fails_minors(self):
        assert segre_minor_residual(singlet_state(), TWO_QUBITS) > 0.1


class TestQuadric:
    def test_two_qubit_is_twice_determinant(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            psi = random_state(rng)
            m = TWO_QUBITS.as_matrix(psi)
            assert Q2.q_invariant(psi) == pytest.approx(
                2.0 * np.linalg.det(m), abs=1e-14
            )

    def test_degenerate_rejected(self):
        from gqm.errors import DegenerateQuadricError

        with pytest.raises(DegenerateQuadricError):
            Quadric(np.zeros((4, 4)))


class TestEntanglementMeasure:
    def test_singlet(self):
        rep = entanglement_measure(singlet_state())
        assert rep.gamma == pytest.approx(0.0, abs=1e-10)
        assert rep.kappa == pytest.approx(0.5, abs=1e-10)
        assert rep.delta == pytest.approx(np.pi / 2, abs=1e-10)
        assert rep.lambda_abs == pytest.approx(1.0, abs=1e-8)

    def test_product_state(self):
        rng = np.random.default_rng(2)
        rep = entanglement_measure(
            segre_embed(random_state(rng, 2), random_state(rng, 2))
        )
        assert rep.gamma == pytest.approx(1.0, abs=1e-10)
        assert rep.delta == pytest.approx(0.0, abs=1e-10)

    def test_worked_example(self):
        rep = entanglement_measure(WORKED)
        assert rep.gamma == pytest.approx(3 / 5, abs=1e-12)
        assert rep.rho == pytest.approx(16 / 25, abs=1e-12)
        assert rep.kappa == pytest.approx(4 / 5, abs=1e-12)
        assert rep.delta == pytest.approx(np.arccos(3 / 5), abs=1e-12)
        assert rep.lambda_abs == pytest.approx(2.0, abs=1e-10)
        # brute-force oracle agrees
        assert brute_force_delta(WORKED) == pytest.approx(rep.delta, abs=1e-6)

    def test_closed_form_vs_oracle(self):
        rng = np.random.default_rng(3)
        for i in range(40):
            psi = random_state(rng)
            closed = entanglement_measure(psi).delta
            assert brute_force_delta(psi, seed=i) == pytest.approx(closed, abs=1e-6)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(4)
        for _ in range(25):
            psi = random_state(rng)
            u, v = random_unitary(rng, 2), random_unitary(rng, 2)
            rotated = PureState(np.kron(u, v) @ psi.components)
            assert entanglement_measure(rotated).delta == pytest.approx(
                entanglement_measure(psi).delta, abs=1e-10
            )

    def test_lambda_rho_kappa_relations(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            rep = entanglement_measure(random_state(rng))
            ll = rep.lambda_abs ** 2
            assert rep.kappa == pytest.approx(ll / (1 + ll), rel=1e-10)
            assert rep.rho == pytest.approx(4 * ll / (1 + ll) ** 2, rel=1e-10)
            assert rep.gamma == pytest.approx(np.sqrt(1 - rep.rho), abs=1e-10)
            assert 0 <= rep.delta <= np.pi / 2 and 0 <= rep.gamma <= 1


class TestNearestFarthest:
    def test_worked_example_roots(self):
        near, far = nearest_farthest(WORKED)
        assert near == PureState([1, 0, 0, 0])
        assert far == PureState([0, 0, 0, 1])
        # mu in {-1/2, -2}: reconstruct mu from X = mu psi + Q^{ab} conj(psi)_b
        tilde = Q2.inverse @ np.conj(WORKED.components)
        mus = []
        for x in (near, far):
            # solve x ~ mu psi + tilde in least squares, read off mu ratio
            m = np.stack([WORKED.components, tilde], axis=1)
            (mu, s), *_ = np.linalg.lstsq(m, x.components, rcond=None)
            mus.append(mu / s)
        np.testing.assert_allclose(sorted(np.real(mus)), [-2.0, -0.5], atol=1e-10)

    def test_both_on_quadric_and_kappa_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            psi = random_state(rng)
            near, far = nearest_farthest(psi)
            assert abs(Q2.q_invariant(near)) < 1e-10
            assert abs(Q2.q_invariant(far)) < 1e-10
            rep = entanglement_measure(psi)
            # kappa(psi, nearest) = (1 + gamma) / 2
            assert transition_probability(psi, near) == pytest.approx(
                rep.kappa, abs=1e-10
            )
            assert transition_probability(psi, near) >= transition_probability(psi, far)

    def test_state_on_quadric_is_its_own_nearest(self):
        rng = np.random.default_rng(7)
        psi = segre_embed(random_state(rng, 2), random_state(rng, 2))
        near, far = nearest_farthest(psi)
        assert near == psi
        assert geodesic_distance(psi, far) == pytest.approx(np.pi, abs=1e-6)

    def test_singlet_degenerate_signal(self):
        with pytest.raises(MaximalEntanglementError):
            nearest_farthest(singlet_state())

    def test_phase_and_scale_independence(self):
        rng = np.random.default_rng(8)
        psi = random_state(rng)
        near1, far1 = nearest_farthest(psi)
        rescaled = PureState((0.3 - 1.2j) * psi.components)
        near2, far2 = nearest_farthest(rescaled)
        assert near1 == near2 and far1 == far2

    def test_decomposition_reproduces_kappa_through_lambda(self):
        # write psi = p X + q Q^{ab} conj(X)_b with X the nearest point and
        # check kappa = |lambda|^2 / (1 + |lambda|^2), rho = 4|l|^2/(1+|l|^2)^2
        rng = np.random.default_rng(18)
        for _ in range(25):
            psi = random_state(rng)
            near, _ = nearest_farthest(psi)
            tilde = Q2.inverse @ np.conj(near.components)
            basis = np.stack([near.components, tilde], axis=1)
            (p, q), *_ = np.linalg.lstsq(basis, psi.components, rcond=None)
            resid = np.linalg.norm(basis @ np.array([p, q]) - psi.components)
            assert resid < 1e-10
            ll = abs(p / q) ** 2
            rep = entanglement_measure(psi)
            assert rep.kappa == pytest.approx(ll / (1 + ll), abs=1e-10)
            assert rep.rho == pytest.approx(4 * ll / (1 + ll) ** 2, abs=1e-10)
            assert abs(p) >= abs(q)


class TestPolarity:
    def test_involution(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            xi = random_state(rng)
            back = polar_point(polar_plane(xi, Q2), Q2)
            assert back == xi

    def test_point_on_quadric_lies_on_its_polar_plane(self):
        rng = np.random.default_rng(10)
        x = segre_embed(random_state(rng, 2), random_state(rng, 2))
        assert abs(polar_plane(x, Q2).pairing(x)) < 1e-12

    def test_harmonic_cross_ratio(self):
        # line through xi meets Q at A, B; the polar plane cuts the line at
        # the harmonic conjugate: {xi, xi*; A, B} = -1
        rng = np.random.default_rng(11)
        for _ in range(30):
            xi = random_state(rng)
            zeta = random_state(rng)
            a = complex(Q2.evaluate(zeta))
            b = complex(Q2.evaluate(xi, zeta))
            c = complex(Q2.evaluate(xi))
            t_roots = np.roots([a, 2.0 * b, c])
            t_star = -c / b
            t1, t2 = t_roots
            cross = (0.0 - t1) * (t_star - t2) / ((0.0 - t2) * (t_star - t1))
            assert cross == pytest.approx(-1.0, abs=1e-8)


class TestMaximalFamily:
    def test_special_points_of_the_axis_family(self):
        axis = Spinor([1.0, 0.0])
        x = segre_embed(axis.to_state(), conjugate_spinor(axis).to_state())
        assert maximal_family(x, 0.0) == singlet_state()
        assert maximal_family(x, np.pi / 2) == PureState([0, 1, 1, 0])
        # the family has period pi as rays
        assert maximal_family(x, np.pi) == singlet_state()

    def test_distance_pi_over_two_from_seed_point(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            x = segre_embed(random_state(rng, 2), random_state(rng, 2))
            psi = maximal_family(x, rng.uniform(0, 2 * np.pi))
            assert geodesic_distance(psi, x) == pytest.approx(np.pi / 2, abs=1e-8)
            assert self_conjugacy_residual(psi) < 1e-12
            assert entanglement_measure(psi).delta == pytest.approx(
                np.pi / 2, abs=1e-7
            )

    def test_off_quadric_seed_rejected(self):
        with pytest.raises(ValidationError):
            maximal_family(singlet_state(), 0.0)

    def test_manifold_probe(self):
        probe = maximal_manifold_probe(60, seed=0, rank_points=6)
        assert probe.max_self_conjugacy_residual < 1e-8
        assert probe.max_delta_error < 1e-8
        assert set(probe.tangent_ranks) == {3}


class TestBruteForce:
    def test_singlet_and_product(self):
        assert brute_force_delta(singlet_state()) == pytest.approx(
            np.pi / 2, abs=1e-6
        )
        prod = segre_embed(PureState([1, 1j]), PureState([0.3, 1]))
        assert brute_force_delta(prod) == pytest.approx(0.0, abs=1e-6)

    def test_dimension_guard(self):
        rng = np.random.default_rng(13)
        with pytest.raises(ValueError, match="guard"):
            brute_force_delta(PureState.random(25, rng), BipartiteSpace(5, 5))

    def test_larger_subsystems_random_starts(self):
        # 2x3 product state: distance zero found by the seeded multistart
        rng = np.random.default_rng(14)
        prod = segre_embed(random_state(rng, 2), random_state(rng, 3))
        assert brute_force_delta(prod, BipartiteSpace(2, 3)) == pytest.approx(
            0.0, abs=1e-6
        )

    def test_deterministic(self):
        rng = np.random.default_rng(15)
        psi = random_state(rng)
        assert brute_force_delta(psi, seed=3) == brute_force_delta(psi, seed=3)


class TestSingletMeasurement:
    def test_axis_basis(self):
        out = singlet_measurement(Spinor([1.0, 0.0]))
        assert out.outcome_up_down == PureState([0, 1, 0, 0])   # e0 x e1 ray
        assert out.outcome_down_up == PureState([0, 0, 1, 0])
        assert out.probabilities[0] == pytest.approx(0.5, abs=1e-12)
        assert out.probabilities[1] == pytest.approx(0.5, abs=1e-12)

    def test_outcomes_on_quadric_and_line(self):
        rng = np.random.default_rng(16)
        for _ in range(20):
            axis = Spinor.random(rng)
            out = singlet_measurement(axis)
            line = singlet_triplet_line(axis)
            for state in (out.outcome_up_down, out.outcome_down_up):
                assert abs(Q2.q_invariant(state)) < 1e-12
                assert line.membership_residual(state) < 1e-10
            assert out.probabilities[0] == pytest.approx(0.5, abs=1e-12)

    def test_first_factors_hit_the_axis_points(self):
        rng = np.random.default_rng(17)
        axis = Spinor.random(rng)
        out = singlet_measurement(axis)
        m1 = TWO_QUBITS.as_matrix(out.outcome_up_down)
        m2 = TWO_QUBITS.as_matrix(out.outcome_down_up)
        # rank-1 component matrices whose first factors are the axis spinors
        for m, spinor in ((m1, axis), (m2, conjugate_spinor(axis))):
            u, s, vh = np.linalg.svd(m)
            assert abs(np.vdot(u[:, 0], spinor.components)) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_triplet_state_matches_spin_geometry(self):
        axis = Spinor([1.0, 0.0])
        assert triplet_zero_state(axis) == PureState([0, 1, 1, 0])
