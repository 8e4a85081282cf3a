import numpy as np
import pytest

from gqm.projective import conjugate_hyperplane, geodesic_distance, line_join
from gqm.spinors import (
    EPSILON,
    Spinor,
    SymSpinor,
    chord_decomposition,
    conic_discriminant,
    conjugate_spinor,
    measurement_probabilities,
    principal_spinors,
    raise_index,
    resymmetrization_residual,
    spin_eigenstates,
    sym_product,
    tau,
    tau_contraction_residual,
    tau_magnitude,
    veronese,
)
from gqm.states import PureState


def random_symspinor(rank, rng):
    return SymSpinor(rank, rng.standard_normal(rank + 1) + 1j * rng.standard_normal(rank + 1))


class TestEpsilonConventions:
    def test_sign_convention(self):
        assert EPSILON[0, 1] == 1.0 and EPSILON[1, 0] == -1.0

    def test_raise_lower_roundtrip(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            s = Spinor.random(rng)
            np.testing.assert_allclose(raise_index(s.lowered()), s.components)

    def test_epsilon_contraction_of_self_vanishes(self):
        s = Spinor([0.3 + 1j, -0.7])
        assert abs(s.epsilon_pair(s)) < 1e-16

    def test_delta_identity(self):
        # eps_AB eps^{AC} = delta_B^C
        delta = np.einsum("ab,ac->bc", EPSILON, EPSILON)
        np.testing.assert_allclose(delta, np.eye(2))


class TestConjugateSpinor:
    def test_axis_example(self):
        bar = conjugate_spinor(Spinor([1.0, 0.0]))
        np.testing.assert_allclose(bar.components, [0.0, -1.0])
        d = geodesic_distance(PureState([1.0, 0.0]), bar.to_state())
        assert d == pytest.approx(np.pi, abs=1e-14)

    def test_double_application_negates_components(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            s = Spinor.random(rng)
            twice = conjugate_spinor(conjugate_spinor(s))
            np.testing.assert_allclose(twice.components, -s.components, atol=1e-15)
            assert twice.ray_equal(s)

    def test_always_orthogonal(self):
        s = Spinor([1.0, 1.0])
        assert abs(np.vdot(conjugate_spinor(s).components, s.components)) < 1e-14


class TestVeronese:
    def test_rank2_basis(self):
        v = veronese(Spinor([1.0, 0.0]), 2)
        np.testing.assert_allclose(v.coeffs, [1.0, 0.0, 0.0])

    def test_rank3_diagonal_point(self):
        v = veronese(Spinor([1.0, 1.0]), 3)
        ratios = v.coeffs / v.coeffs[0]
        np.testing.assert_allclose(ratios, [1.0, 1.0, 1.0, 1.0], atol=1e-15)

    def test_rank3_image_annihilates_tau(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            v = veronese(Spinor.random(rng), 3)
            assert tau_magnitude(v) < 1e-12

    def test_rank2_image_on_conic(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            assert conic_discriminant(veronese(Spinor.random(rng), 2)) < 1e-14


class TestPrincipalSpinors:
    def test_repeated_for_coherent_point(self):
        xi = Spinor([0.8, 0.6j])
        roots = principal_spinors(veronese(xi, 2))
        assert len(roots) == 2
        for r in roots:
            assert r.ray_equal(xi, tol=1e-10)

    def test_build_then_decompose_rank2(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            a, b = Spinor.random(rng), Spinor.random(rng)
            phi = sym_product(a, b)
            roots = principal_spinors(phi)
            assert resymmetrization_residual(phi, roots) < 1e-8
            matched = (roots[0].ray_equal(a, 1e-7) and roots[1].ray_equal(b, 1e-7)) or (
                roots[0].ray_equal(b, 1e-7) and roots[1].ray_equal(a, 1e-7)
            )
            assert matched

    def test_root_at_infinity(self):
        # form with vanishing leading coefficient factors through (0, 1)
        phi = sym_product(Spinor([0.0, 1.0]), Spinor([1.0, 2.0]))
        roots = principal_spinors(phi)
        assert any(r.ray_equal(Spinor([0.0, 1.0])) for r in roots)

    def test_conic_membership_is_discriminant(self):
        rng = np.random.default_rng(5)
        on = veronese(Spinor.random(rng), 2)
        off = sym_product(Spinor([1.0, 0.0]), Spinor([0.0, 1.0]))
        assert conic_discriminant(on) < 1e-10
        assert conic_discriminant(off) > 1e-2


class TestTau:
    def test_identity_on_random_states(self):
        rng = np.random.default_rng(6)
        worst = max(
            tau_contraction_residual(random_symspinor(3, rng)) for _ in range(200)
        )
        assert worst < 1e-12

    def test_vanishes_exactly_on_curve(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            assert tau_magnitude(veronese(Spinor.random(rng), 3)) < 1e-12

    def test_tangent_states_give_degenerate_tau(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            xi, eta = Spinor.random(rng), Spinor.random(rng)
            t = tau(sym_product(xi, xi, eta))
            assert conic_discriminant(t) < 1e-8


class TestChordDecomposition:
    def test_diagonal_case(self):
        psi = SymSpinor(3, [1.0, 0.0, 0.0, 1.0])
        dec = chord_decomposition(psi)
        assert dec.branch == "generic"
        rays = {0, 1}
        found = set()
        for s in (dec.xi, dec.eta):
            if s.ray_equal(Spinor([1.0, 0.0])):
                found.add(0)
            if s.ray_equal(Spinor([0.0, 1.0])):
                found.add(1)
        assert found == rays
        assert abs(dec.u) == pytest.approx(abs(dec.v), rel=1e-10)
        assert dec.residual < 1e-12

    def test_round_trip_on_random_states(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            psi = random_symspinor(3, rng)
            dec = chord_decomposition(psi)
            assert dec.branch == "generic"
            assert dec.residual < 1e-8
            assert abs(dec.xi.epsilon_pair(dec.eta)) > 1e-10

    def test_on_curve_branch(self):
        xi = Spinor([0.6, 0.8j])
        dec = chord_decomposition(veronese(xi, 3))
        assert dec.branch == "on_curve"
        assert dec.xi.ray_equal(xi, tol=1e-10)

    def test_tangent_branch_recovers_both_spinors(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            xi, eta = Spinor.random(rng), Spinor.random(rng)
            psi = sym_product(xi, xi, eta)
            dec = chord_decomposition(psi)
            assert dec.branch == "tangent"
            assert dec.xi.ray_equal(xi, tol=1e-6)
            assert dec.residual < 1e-8


class TestSpinEigenstates:
    def test_axis_basis_spin1(self):
        family = spin_eigenstates(Spinor([1.0, 0.0]), 2)
        assert [ev for ev, _ in family] == [1.0, 0.0, -1.0]
        expected = [PureState([1, 0, 0]), PureState([0, 1, 0]), PureState([0, 0, 1])]
        for (_, got), want in zip(family, expected):
            assert got == want

    @pytest.mark.parametrize("rank", [2, 3])
    def test_mutual_orthogonality(self, rank):
        rng = np.random.default_rng(11 + rank)
        for _ in range(20):
            family = spin_eigenstates(Spinor.random(rng), rank)
            mat = np.stack([s.components for _, s in family])
            gram = np.conj(mat) @ mat.T
            np.testing.assert_allclose(gram, np.eye(rank + 1), atol=1e-12)

    def test_extreme_weights_on_curve_but_not_half(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            family = dict(spin_eigenstates(Spinor.random(rng), 3))
            for ev, state in family.items():
                form = SymSpinor.from_pure_state(state, 3)
                if abs(ev) == 1.5:
                    assert tau_magnitude(form) < 1e-12
                else:
                    assert tau_magnitude(form) > 1e-3


class TestMeasurementProbabilities:
    def test_eigenstate_gives_certainty(self):
        family = spin_eigenstates(Spinor([1.0, 0.0]), 2)
        probs = measurement_probabilities(family[0][1], [s for _, s in family])
        np.testing.assert_allclose(probs, [1.0, 0.0, 0.0], atol=1e-12)

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            family = spin_eigenstates(Spinor.random(rng), 2)
            probs = measurement_probabilities(
                PureState.random(3, rng), [s for _, s in family]
            )
            assert float(np.sum(probs)) == pytest.approx(1.0, abs=1e-12)

    def test_uniform_state_uniform_probabilities(self):
        state = PureState([1.0, 1.0, 1.0])
        family = spin_eigenstates(Spinor([1.0, 0.0]), 2)
        probs = measurement_probabilities(state, [s for _, s in family])
        np.testing.assert_allclose(probs, [1 / 3, 1 / 3, 1 / 3], atol=1e-12)

    def test_equals_transition_probability(self):
        from gqm.projective import transition_probability

        rng = np.random.default_rng(15)
        family = [s for _, s in spin_eigenstates(Spinor.random(rng), 3)]
        state = PureState.random(4, rng)
        probs = measurement_probabilities(state, family)
        for p, e in zip(probs, family):
            assert p == pytest.approx(transition_probability(state, e), abs=1e-12)

    def test_non_orthogonal_family_rejected(self):
        family = [PureState([1, 0, 0]), PureState([1, 1, 0]), PureState([0, 0, 1])]
        with pytest.raises(ValueError, match="orthogonal"):
            measurement_probabilities(PureState([1, 1, 1]), family)


class TestConicTangency:
    def test_conjugate_hyperplane_touches_conic(self):
        # the conjugate plane of a conic point contains the conjugate conic
        # point and the tangent direction there
        rng = np.random.default_rng(16)
        for _ in range(20):
            xi = Spinor.random(rng)
            mu = Spinor.random(rng)
            bar = conjugate_spinor(xi)
            plane = conjugate_hyperplane(veronese(xi, 2).to_pure_state())
            touch = veronese(bar, 2).to_pure_state()
            tangent_dir = sym_product(bar, mu).to_pure_state()
            assert abs(plane.pairing(touch)) < 1e-12
            assert abs(plane.pairing(tangent_dir)) < 1e-12

    def test_zero_eigenstate_on_both_tangent_lines(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            psi = Spinor.random(rng)
            bar = conjugate_spinor(psi)
            mu = Spinor.random(rng)
            zero_state = sym_product(psi, bar).to_pure_state()
            tangent_at_psi = line_join(
                veronese(psi, 2).to_pure_state(), sym_product(psi, mu).to_pure_state()
            )
            tangent_at_bar = line_join(
                veronese(bar, 2).to_pure_state(), sym_product(bar, mu).to_pure_state()
            )
            assert tangent_at_psi.membership_residual(zero_state) < 1e-10
            assert tangent_at_bar.membership_residual(zero_state) < 1e-10
