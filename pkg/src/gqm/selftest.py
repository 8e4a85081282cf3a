"""Acceptance harness: one callable per criterion, shared by the CLI
`selftest` subcommand and the pytest acceptance module.

Every criterion pins its tolerances here; the strict profile scales them
all by the given factor (0.5 under --tolerance-profile strict).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import dynamics, ensembles, entangle, phase, projective, spinors, stats
from .states import ChartPoint, Observable, PureState


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    detail: str


def _random_state(rng, dim):
    return PureState.random(dim, rng)


def _random_hermitian(rng, dim, scale=1.0):
    return Observable.random(dim, rng, scale=scale)


def _random_unitary(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------

def criterion_probability_miracle(seed: int, tol_scale: float) -> CriterionResult:
    """1: spin-1 outcome probabilities from geodesic distances sum to one."""
    rng = np.random.default_rng(seed + 1)
    tol = 1e-12 * tol_scale
    worst = 0.0
    for _ in range(1000):
        state = _random_state(rng, 3)
        axis = spinors.Spinor.random(rng)
        eigs = [s for _, s in spinors.spin_eigenstates(axis, 2)]
        probs = spinors.measurement_probabilities(state, eigs)
        worst = max(worst, abs(float(np.sum(probs)) - 1.0))
    return CriterionResult(
        1, "probability miracle (spin-1, 1000 draws)", worst < tol,
        f"max |sum P - 1| = {worst:.3e} (tol {tol:.1e})",
    )


def criterion_entanglement_closed_form(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 2)
    tol_exact = 1e-10 * tol_scale
    tol_oracle = 1e-6 * tol_scale
    tol_onq = 1e-10 * tol_scale
    q2 = entangle.Quadric.two_qubit()

    singlet = entangle.singlet_state()
    d_singlet = entangle.entanglement_measure(singlet).delta
    product = entangle.segre_embed(_random_state(rng, 2), _random_state(rng, 2))
    d_product = entangle.entanglement_measure(product).delta

    worst_gap = 0.0
    worst_onq = 0.0
    for i in range(200):
        psi = _random_state(rng, 4)
        closed = entangle.entanglement_measure(psi)
        oracle = entangle.brute_force_delta(psi, seed=i)
        worst_gap = max(worst_gap, abs(closed.delta - oracle))
        worst_onq = max(
            worst_onq,
            q2.on_quadric_residual(closed.nearest),
            q2.on_quadric_residual(closed.farthest),
        )
    ok = (
        abs(d_singlet - np.pi / 2) < tol_exact
        and abs(d_product) < tol_exact
        and worst_gap < tol_oracle
        and worst_onq < tol_onq
    )
    return CriterionResult(
        2, "entanglement closed form vs oracle (200 draws)", ok,
        f"delta(singlet) off by {abs(d_singlet - np.pi / 2):.2e}, "
        f"delta(product) = {d_product:.2e}, max |closed - oracle| = {worst_gap:.3e}, "
        f"max Q(X,X) = {worst_onq:.2e}",
    )


def criterion_maximal_family(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 3)
    tol_delta = 1e-8 * tol_scale
    tol_unitary = 1e-10 * tol_scale
    probe = entangle.maximal_manifold_probe(500, seed=seed + 3)
    worst_u = 0.0
    for _ in range(50):
        psi = _random_state(rng, 4)
        u = _random_unitary(rng, 2)
        v = _random_unitary(rng, 2)
        rotated = PureState(np.kron(u, v) @ psi.components)
        worst_u = max(
            worst_u,
            abs(entangle.entanglement_measure(psi).delta
                - entangle.entanglement_measure(rotated).delta),
        )
    ok = (
        probe.max_self_conjugacy_residual < tol_delta
        and probe.max_delta_error < tol_delta
        and all(r == 3 for r in probe.tangent_ranks)
        and worst_u < tol_unitary
    )
    return CriterionResult(
        3, "maximal family (500 samples) and local unitary invariance", ok,
        f"max self-conjugacy residual {probe.max_self_conjugacy_residual:.2e}, "
        f"max |delta - pi/2| = {probe.max_delta_error:.2e}, "
        f"tangent ranks {sorted(set(probe.tangent_ranks))}, "
        f"max unitary delta shift {worst_u:.2e}",
    )


def criterion_speed_uncertainty(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 4)
    tol = 1e-5 * tol_scale
    worst = 0.0
    for dim in (2, 3):
        for _ in range(250):
            h = _random_hermitian(rng, dim)
            psi = _random_state(rng, dim)
            ds_dt, two_dh = dynamics.speed_check(h, psi)
            rel = abs(h.hbar * ds_dt - two_dh) / max(0.5 * two_dh, 1e-12)
            worst = max(worst, rel)
    return CriterionResult(
        4, "speed-uncertainty relation (500 draws, CP^1 and CP^2)", worst < tol,
        f"max relative residual {worst:.3e} (tol {tol:.1e})",
    )


def criterion_torus_confinement(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 5)
    tol_drift = 1e-10 * tol_scale
    h = Observable(np.diag([0.0, 1.0, np.sqrt(2.0)]).astype(complex))
    psi0 = PureState((np.ones(3) + 0.1 * rng.standard_normal(3)) / np.sqrt(3.0))
    _, p_ref = dynamics.action_variables(h, psi0)
    drift = 0.0
    for t in np.linspace(0.5, 100.0, 64):
        _, p_t = dynamics.action_variables(h, dynamics.evolve_exact(h, psi0, float(t)))
        drift = max(drift, float(np.max(np.abs(p_t - p_ref))))

    # recurrence sweep with a Lipschitz certificate: the state-space speed
    # bounds how far the distance can dip between samples
    times = np.arange(0.1, 200.0 + 1e-9, 0.005)
    comps = dynamics.evolve_exact_many(h, psi0, times)
    fidelity = np.abs(comps @ np.conj(psi0.components))
    dists = 2.0 * np.arccos(np.clip(fidelity, 0.0, 1.0))
    speed = 2.0 * np.sqrt(h.variance(psi0))
    margin = speed * 0.5 * 0.005
    min_dist = float(np.min(dists))
    ok = drift < tol_drift and (min_dist - margin) > 1e-3
    return CriterionResult(
        5, "torus confinement and quasiergodic non-recurrence", ok,
        f"max action drift {drift:.2e} over t<=100, min distance "
        f"{min_dist:.4f} (- margin {margin:.4f}) over t in (0.1, 200]",
    )


def criterion_killing_characteristic(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 6)
    tol_lin = 1e-4 * tol_scale
    thr_nonlin = 1e-2
    tol_char = 1e-3 * tol_scale
    worst_lin = 0.0
    best_nonlin = np.inf
    worst_char = 0.0
    for dim in (2, 3):
        n = dim - 1
        h_lin = dynamics.HamiltonianFunction.linear(_random_hermitian(rng, dim))
        h_nl = dynamics.HamiltonianFunction.expectation_power(
            Observable(np.diag(np.arange(dim, dtype=float)).astype(complex)), 2
        )
        for _ in range(25):
            x = ChartPoint(0, rng.uniform(-1.0, 1.0, size=2 * n))
            worst_lin = max(worst_lin, dynamics.killing_deviation(h_lin, x))
            # generic points for the nonlinear control: away from fixed points
            r = rng.uniform(0.4, 1.2)
            direction = rng.standard_normal(2 * n)
            xg = ChartPoint(0, r * direction / np.max(np.abs(direction)))
            best_nonlin = min(best_nonlin, dynamics.killing_deviation(h_nl, xg))
            h_obs = _random_hermitian(rng, dim)
            worst_char = max(
                worst_char,
                dynamics.characteristic_residual(
                    h_obs, ChartPoint(0, rng.uniform(-0.8, 0.8, size=2 * n))
                ),
            )
    ok = worst_lin < tol_lin and best_nonlin > thr_nonlin and worst_char < tol_char
    return CriterionResult(
        6, "Killing and characteristic-equation diagnostics", ok,
        f"max linear deviation {worst_lin:.2e} (< {tol_lin:.0e}), min nonlinear "
        f"deviation {best_nonlin:.2e} (> {thr_nonlin:.0e}), max characteristic "
        f"residual {worst_char:.2e} (< {tol_char:.0e})",
    )


def criterion_geometric_phase(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 7)
    tol_agree = 1e-6 * tol_scale
    tol_equator = 1e-6 * tol_scale
    tol_lin = 1e-5 * tol_scale
    tol_nl = 1e-4 * tol_scale

    equator = phase.Loop([
        PureState([1.0, np.exp(1j * a)])
        for a in np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    ])
    beta_eq = phase.holonomy_phase(equator)

    loop = phase.Loop([
        PureState(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        for _ in range(6)
    ])
    beta_ref, refined = phase.holonomy_phase_refined(loop, tol=1e-7)
    base = _random_state(rng, 3)
    gap_fan = phase.angle_difference(phase.surface_phase(refined, base), beta_ref)

    # unitary transport maps geodesics to geodesics, so a coarse polygon
    # transports without discretization error
    h_lin = dynamics.HamiltonianFunction.linear(_random_hermitian(rng, 2))
    loop2 = phase.Loop([
        PureState(rng.standard_normal(2) + 1j * rng.standard_normal(2))
        for _ in range(8)
    ])
    b0, b1 = phase.poincare_invariant_check(loop2, h_lin, t=5.0, dt=2e-3)
    gap_lin = phase.angle_difference(b0, b1)

    # a nonlinear flow bends geodesic sides; the polygon-vs-image sliver
    # shrinks as 1/m^2, so transport a dense chart circle
    h_nl = dynamics.HamiltonianFunction.expectation_power(
        Observable(np.diag([0.0, 1.0]).astype(complex)), 2
    )
    angles = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
    circle = phase.Loop([
        PureState([1.0, (0.5 + 0.6 * np.cos(a)) + 1j * (0.2 + 0.6 * np.sin(a))])
        for a in angles
    ])
    b2, b3 = phase.poincare_invariant_check(circle, h_nl, t=2.0, dt=5e-3)
    gap_nl = phase.angle_difference(b2, b3)

    ok = (
        abs(abs(beta_eq) - np.pi) < tol_equator
        and gap_fan < tol_agree
        and gap_lin < tol_lin
        and gap_nl < tol_nl
    )
    return CriterionResult(
        7, "geometric phase: holonomy, fan, Poincare invariance", ok,
        f"equator |beta| off by {abs(abs(beta_eq) - np.pi):.2e}, holonomy-fan gap "
        f"{gap_fan:.2e}, transport gaps linear {gap_lin:.2e} / nonlinear {gap_nl:.2e}",
    )


def criterion_uncertainty_geometry(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 8)
    tol_var = 1e-6 * tol_scale
    tol_slack = -1e-10 * tol_scale
    worst_var = 0.0
    worst_slack = np.inf
    for dim in (2, 3):
        n = dim - 1
        for _ in range(250):
            f = _random_hermitian(rng, dim)
            x = ChartPoint(0, rng.uniform(-1.0, 1.0, size=2 * n))
            worst_var = max(
                worst_var,
                abs(stats.geometric_variance(f, x) - stats.operator_variance(f, x)),
            )
        for _ in range(100):
            f = _random_hermitian(rng, dim)
            g = _random_hermitian(rng, dim)
            x = ChartPoint(0, rng.uniform(-1.0, 1.0, size=2 * n))
            worst_slack = min(worst_slack, stats.kahler_inequality_terms(f, g, x).slack)
    mu2 = 0.37
    gauss = stats.MomentSet(mean=0.0, mu2=mu2, mu4=3.0 * mu2 ** 2, mu6=15.0 * mu2 ** 3)
    bound = stats.generalized_heisenberg_bound(gauss)
    gauss_exact = bound.value == 0.25 and not bound.degenerate
    ok = worst_var < tol_var and worst_slack > tol_slack and gauss_exact
    return CriterionResult(
        8, "uncertainty geometry (variance identity, Kaehler inequality)", ok,
        f"max |geometric - operator| variance {worst_var:.3e}, min Kaehler slack "
        f"{worst_slack:.3e}, Gaussian moments give exactly hbar^2/4: {gauss_exact}",
    )


def criterion_ensembles(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 9)
    tol_transport = 1e-6 * tol_scale
    tol_jac = 1e-5 * tol_scale

    h_obs = _random_hermitian(rng, 3)
    h_lin = dynamics.HamiltonianFunction.linear(h_obs)
    ens = ensembles.EnsembleState(
        [(_random_state(rng, 3), rng.uniform(0.2, 1.0)) for _ in range(10)]
    )
    t = 1.0
    moved = ensembles.liouville_transport(ens, h_lin, t)
    rho_t = ensembles.density_matrix(moved).matrix
    from scipy.linalg import expm

    u = expm(-1j * h_obs.matrix * t / h_obs.hbar)
    rho_expected = u @ ensembles.density_matrix(ens).matrix @ u.conj().T
    gap_transport = float(np.max(np.abs(rho_t - rho_expected)))

    worst_jac = 0.0
    h_nl = dynamics.HamiltonianFunction.expectation_power(
        Observable(np.diag([0.0, 1.0]).astype(complex)), 2
    )
    h_lin2 = dynamics.HamiltonianFunction.linear(_random_hermitian(rng, 2))
    for ham in (h_lin2, h_nl):
        for _ in range(4):
            x = ChartPoint(0, rng.uniform(-0.8, 0.8, size=2))
            det = dynamics.flow_jacobian_determinant(ham, x, t=1.0)
            worst_jac = max(worst_jac, abs(det - 1.0))

    h2 = Observable(np.diag([0.0, 1.0]).astype(complex))
    gibbs0 = ensembles.gibbs_density_matrix(h2, 0.0)
    max0 = ensembles.maxent_ensemble(h2, 0.0, samples=20000, seed=seed + 90)
    dm0 = ensembles.density_matrix(max0)
    z_agree = _max_zscore(dm0, gibbs0.matrix)

    gibbs2 = ensembles.gibbs_density_matrix(h2, 2.0)
    max2 = ensembles.maxent_ensemble(h2, 2.0, samples=20000, seed=seed + 91)
    dm2 = ensembles.density_matrix(max2)
    z_disagree = _max_zscore(dm2, gibbs2.matrix)
    quad2 = ensembles.maxent_density_cp1_quadrature(h2, 2.0)
    z_quad = _max_zscore(dm2, quad2.matrix)

    ok = (
        gap_transport < tol_transport
        and worst_jac < tol_jac
        and z_agree < 3.0
        and z_disagree > 5.0
        and z_quad < 3.0
    )
    return CriterionResult(
        9, "ensembles: transport, volume preservation, Gibbs vs maxent", ok,
        f"transport gap {gap_transport:.2e}, max |jacobian - 1| {worst_jac:.2e}, "
        f"beta=0 agreement {z_agree:.2f} sigma, beta=2 separation "
        f"{z_disagree:.1f} sigma, quadrature match {z_quad:.2f} sigma",
    )


def _max_zscore(dm: ensembles.DensityMatrix, reference: np.ndarray) -> float:
    """Largest componentwise |difference| / stderr (stderr floored)."""
    diff = np.abs(dm.matrix - reference)
    se = np.maximum(dm.stderr, 1e-12)
    return float(np.max(diff / se))


def criterion_gauge_invariance(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 10)
    tol = 1e-12 * tol_scale
    worst = 0.0
    labels = []

    def check(label, value_plain, value_rescaled):
        nonlocal worst
        gap = float(np.max(np.abs(np.asarray(value_plain) - np.asarray(value_rescaled))))
        if gap >= tol:
            labels.append(f"{label}: {gap:.2e}")
        worst = max(worst, gap)

    for _ in range(10):
        a, b = _random_state(rng, 3), _random_state(rng, 3)
        ar = projective.rescale_randomly(a, rng)
        br = projective.rescale_randomly(b, rng)
        check("transition_probability",
              projective.transition_probability(a, b),
              projective.transition_probability(ar, br))
        check("geodesic_distance",
              projective.geodesic_distance(a, b),
              projective.geodesic_distance(ar, br))
        check("line_join",
              projective.line_join(a, b).normalized(),
              projective.line_join(ar, br).normalized())
        h = _random_hermitian(rng, 3)
        check("expectation", h.expectation(a), h.expectation(ar))
        check("evolve_exact ray",
              1.0,
              projective.transition_probability(
                  dynamics.evolve_exact(h, a, 0.7),
                  dynamics.evolve_exact(h, ar, 0.7)))
        check("action_variables",
              dynamics.action_variables(h, a)[1],
              dynamics.action_variables(h, ar)[1])
        # speed_check differentiates at dt = 1e-6, which amplifies
        # representative round-off by 1/dt; compare at its own noise floor
        s_plain = np.asarray(dynamics.speed_check(h, a))
        s_resc = np.asarray(dynamics.speed_check(h, ar))
        check("speed_check (fd floor)", 0.0,
              max(0.0, float(np.max(np.abs(s_plain - s_resc))) - 1e-9))

        psi4, psi4r = _random_state(rng, 4), None
        psi4r = projective.rescale_randomly(psi4, rng)
        rep = entangle.entanglement_measure(psi4)
        repr_ = entangle.entanglement_measure(psi4r)
        check("entanglement delta/gamma/rho/kappa",
              (rep.delta, rep.gamma, rep.rho, rep.kappa),
              (repr_.delta, repr_.gamma, repr_.rho, repr_.kappa))
        check("nearest ray", 1.0,
              projective.transition_probability(rep.nearest, repr_.nearest))

        xi = spinors.Spinor.random(rng)
        psi3 = spinors.SymSpinor(3, rng.standard_normal(4) + 1j * rng.standard_normal(4))
        psi3r = spinors.SymSpinor(3, psi3.coeffs * (1.7 - 0.3j))
        check("tau magnitude", spinors.tau_magnitude(psi3), spinors.tau_magnitude(psi3r))
        eigs = [s for _, s in spinors.spin_eigenstates(xi, 2)]
        s3, s3r = _random_state(rng, 3), None
        s3r = projective.rescale_randomly(s3, rng)
        check("measurement_probabilities",
              spinors.measurement_probabilities(s3, eigs),
              spinors.measurement_probabilities(s3r, eigs))

        # holonomy: rescaling every loop point is exactly invariant
        pts = [PureState(rng.standard_normal(2) + 1j * rng.standard_normal(2))
               for _ in range(5)]
        loop_plain = phase.Loop(pts)
        loop_scaled = phase.Loop([projective.rescale_randomly(p, rng) for p in pts])
        check("holonomy_phase",
              phase.holonomy_phase(loop_plain), phase.holonomy_phase(loop_scaled))

    # gauge-shifted exact lifts leave the ray-level evolution residual at zero
    worst_res = 0.0
    for _ in range(20):
        h = _random_hermitian(rng, 3)
        psi = _random_state(rng, 3)
        lam = complex(rng.standard_normal(), rng.standard_normal())
        d = h.matrix @ psi.components / (1j * h.hbar) + lam * psi.components
        worst_res = max(worst_res,
                        projective.projective_schrodinger_residual(h, psi, d))
    ok = worst < tol and worst_res < tol
    detail = f"max invariance gap {worst:.2e}, max gauge-shifted residual {worst_res:.2e}"
    if labels:
        detail += "; offenders: " + ", ".join(labels[:4])
    return CriterionResult(10, "gauge invariance of exported quantities", ok, detail)


def criterion_spinor_geometry(seed: int, tol_scale: float) -> CriterionResult:
    rng = np.random.default_rng(seed + 11)
    tol_tau = 1e-12 * tol_scale
    tol_chord = 1e-8 * tol_scale
    tol_orth = 1e-12 * tol_scale
    worst_tau = 0.0
    worst_chord = 0.0
    for _ in range(1000):
        psi = spinors.SymSpinor(3, rng.standard_normal(4) + 1j * rng.standard_normal(4))
        worst_tau = max(worst_tau, spinors.tau_contraction_residual(psi))
        dec = spinors.chord_decomposition(psi)
        if dec.branch == "generic":
            worst_chord = max(worst_chord, dec.residual)

    worst_gram = 0.0
    worst_on_curve = 0.0
    for _ in range(50):
        axis = spinors.Spinor.random(rng)
        family = spinors.spin_eigenstates(axis, 3)
        mat = np.stack([s.components for _, s in family])
        gram = np.conj(mat) @ mat.T
        worst_gram = max(worst_gram, float(np.max(np.abs(gram - np.eye(4)))))
        for ev, s in family:
            if abs(ev) == 1.5:
                form = spinors.SymSpinor.from_pure_state(s, 3)
                worst_on_curve = max(worst_on_curve, spinors.tau_magnitude(form))
    ok = (
        worst_tau < tol_tau
        and worst_chord < tol_chord
        and worst_gram < tol_orth
        and worst_on_curve < 1e-10
    )
    return CriterionResult(
        11, "spinor geometry: tau identity, chords, spin-3/2 families", ok,
        f"max tau contraction {worst_tau:.2e}, max chord residual {worst_chord:.2e}, "
        f"max Gram defect {worst_gram:.2e}, max tau on curve {worst_on_curve:.2e}",
    )


CRITERIA: list[Callable[[int, float], CriterionResult]] = [
    criterion_probability_miracle,
    criterion_entanglement_closed_form,
    criterion_maximal_family,
    criterion_speed_uncertainty,
    criterion_torus_confinement,
    criterion_killing_characteristic,
    criterion_geometric_phase,
    criterion_uncertainty_geometry,
    criterion_ensembles,
    criterion_gauge_invariance,
    criterion_spinor_geometry,
]


def run_all(seed: int = 7, tol_scale: float = 1.0) -> list[CriterionResult]:
    return [fn(seed, tol_scale) for fn in CRITERIA]
