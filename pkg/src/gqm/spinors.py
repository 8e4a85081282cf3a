"""Two-component spinor algebra and symmetric spinors as binary forms.

Conventions: the symplectic spinor metric has eps_{01} = +1, indices are
lowered by adjacent right contraction (phi_B = phi^A eps_AB) and raised by
eps^{AB} with eps^{01} = +1, so raise(lower(v)) = v.  Conjugation maps a
ket spinor to the covector of plain conjugates; the raised conjugate
("bar" spinor) of (a, b) is (conj(b), -conj(a)), which is Fubini-Study
antipodal to the original on CP^1.

A totally symmetric rank-k spinor is stored through its k+1 independent
components c_r (the component with r indices equal to 1); its binary form
in the dual variable is sum_r C(k, r) c_r x^(k-r) y^r, which makes the
degree-k coherent maps (t, u) -> (t^k, t^(k-1) u, ..., u^k) literal
coefficient maps.  Embedding into CP^k as a quantum state carries the
multinomial weights sqrt(C(k, r)) so that the projective inner product
agrees with the spinor contraction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ZeroVectorError
from .projective import geodesic_distance
from .states import PureState

# eps[A, B] = eps_{AB}; the raised eps^{AB} has the same numerical entries.
EPSILON = np.array([[0.0, 1.0], [-1.0, 0.0]])

ON_CURVE_TOL = 1e-9
TANGENT_TOL = 1e-9


class Spinor:
    """A nonzero two-component spinor, kept at unit norm."""

    __slots__ = ("components",)

    def __init__(self, components):
        vec = np.asarray(components, dtype=np.complex128).reshape(-1)
        if vec.size != 2:
            raise ValueError("a spinor has exactly two components")
        norm = np.linalg.norm(vec)
        if norm < 1e-300:
            raise ZeroVectorError("zero spinor")
        vec = vec / norm
        vec.flags.writeable = False
        object.__setattr__(self, "components", vec)

    def __setattr__(self, name, value):
        raise AttributeError("Spinor is immutable")

    @property
    def a0(self) -> complex:
        return complex(self.components[0])

    @property
    def a1(self) -> complex:
        return complex(self.components[1])

    def lowered(self) -> np.ndarray:
        """phi_B = phi^A eps_AB, i.e. (-phi^1, phi^0)."""
        v = self.components
        return np.array([-v[1], v[0]])

    def epsilon_pair(self, other: "Spinor") -> complex:
        """xi_A eta^A = xi^0 eta^1 - xi^1 eta^0 (zero iff proportional)."""
        return complex(
            self.components[0] * other.components[1]
            - self.components[1] * other.components[0]
        )

    def to_state(self) -> PureState:
        return PureState(self.components)

    def ray_equal(self, other: "Spinor", tol: float = 1e-12) -> bool:
        return abs(np.vdot(self.components, other.components)) >= 1.0 - tol

    @staticmethod
    def random(rng: np.random.Generator) -> "Spinor":
        return Spinor(rng.standard_normal(2) + 1j * rng.standard_normal(2))

    def __repr__(self):
        return f"Spinor({self.a0:.6g}, {self.a1:.6g})"


def raise_index(covector) -> np.ndarray:
    """phi^A = eps^{AB} phi_B, i.e. (phi_1, -phi_0)."""
    w = np.asarray(covector, dtype=np.complex128)
    return np.array([w[1], -w[0]])


def conjugate_spinor(xi: Spinor) -> Spinor:
    """The raised conjugate xi^A -> eps^{AB} conj(xi)_B = (conj(a1), -conj(a0)).

    Applying the map twice returns the negative of the original components,
    hence the same ray; the image is always orthogonal (antipodal on CP^1).
    """
    return Spinor(raise_index(np.conj(xi.components)))


class SymSpinor:
    """Totally symmetric rank-k two-component spinor (k+1 components)."""

    __slots__ = ("rank", "coeffs")

    def __init__(self, rank: int, coeffs):
        if rank not in (2, 3):
            raise ValueError("supported ranks are 2 and 3")
        vec = np.asarray(coeffs, dtype=np.complex128).reshape(-1)
        if vec.size != rank + 1:
            raise DimensionMismatchError(
                f"rank {rank} needs {rank + 1} components, got {vec.size}"
            )
        if np.linalg.norm(vec) < 1e-300:
            raise ZeroVectorError("zero symmetric spinor")
        vec = vec.copy()
        vec.flags.writeable = False
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "coeffs", vec)

    def __setattr__(self, name, value):
        raise AttributeError("SymSpinor is immutable")

    def weights(self) -> np.ndarray:
        return np.array([math.comb(self.rank, r) for r in range(self.rank + 1)], dtype=float)

    def spinor_norm(self) -> float:
        """sqrt of the spinor contraction conj(phi)_{A..} phi^{A..}."""
        return float(np.sqrt(np.sum(self.weights() * np.abs(self.coeffs) ** 2)))

    def form_coefficients(self) -> np.ndarray:
        """Coefficients a_r of the binary form sum_r a_r x^(k-r) y^r."""
        return self.weights() * self.coeffs

    def to_tensor(self) -> np.ndarray:
        """The full symmetric tensor, shape (2,) * rank."""
        t = np.empty((2,) * self.rank, dtype=np.complex128)
        for index in itertools.product((0, 1), repeat=self.rank):
            t[index] = self.coeffs[sum(index)]
        return t

    @staticmethod
    def from_tensor(tensor: np.ndarray) -> "SymSpinor":
        rank = tensor.ndim
        coeffs = [tensor[(0,) * (rank - r) + (1,) * r] for r in range(rank + 1)]
        return SymSpinor(rank, coeffs)

    def to_pure_state(self) -> PureState:
        """Embed into CP^k with the multinomial weights sqrt(C(k, r))."""
        return PureState(np.sqrt(self.weights()) * self.coeffs)

    @staticmethod
    def from_pure_state(state: PureState, rank: int) -> "SymSpinor":
        if state.dim != rank + 1:
            raise DimensionMismatchError(
                f"state dim {state.dim} does not match rank {rank}"
            )
        w = np.array([math.comb(rank, r) for r in range(rank + 1)], dtype=float)
        return SymSpinor(rank, state.components / np.sqrt(w))

    def ray_equal(self, other: "SymSpinor", tol: float = 1e-12) -> bool:
        return self.rank == other.rank and self.to_pure_state().ray_equal(
            other.to_pure_state(), tol
        )

    def __repr__(self):
        return f"SymSpinor(rank={self.rank}, coeffs={np.array2string(self.coeffs, precision=6)})"


def sym_product(*spinors: Spinor) -> SymSpinor:
    """Symmetrized outer product of k spinors (average over permutations)."""
    k = len(spinors)
    vecs = [s.components for s in spinors]
    t = np.zeros((2,) * k, dtype=np.complex128)
    for perm in itertools.permutations(range(k)):
        cur = vecs[perm[0]]
        for i in perm[1:]:
            cur = np.multiply.outer(cur, vecs[i])
        t += cur
    return SymSpinor.from_tensor(t / math.factorial(k))


def veronese(xi: Spinor, k: int) -> SymSpinor:
    """The degree-k coherent image xi^A xi^B (xi^C): component r is
    a0^(k-r) a1^r, so the map is the literal coefficient map."""
    if k not in (2, 3):
        raise ValueError("supported ranks are 2 and 3")
    a, b = xi.a0, xi.a1
    return SymSpinor(k, [a ** (k - r) * b ** r for r in range(k + 1)])


def principal_spinors(phi: SymSpinor) -> list[Spinor]:
    """The k root factors of the binary form of phi, with multiplicity.

    Root finding goes through the companion matrix of the dehomogenized
    polynomial (numpy.roots); leading coefficients that vanish relative to
    the largest one correspond to factors at (0, 1).
    """
    a = phi.form_coefficients()
    scale = np.max(np.abs(a))
    a = a / scale
    lead = 0
    while lead < a.size - 1 and abs(a[lead]) < 1e-13:
        lead += 1
    spinors = [Spinor([0.0, 1.0]) for _ in range(lead)]
    poly = a[lead:]
    if poly.size > 1:
        for w in np.roots(poly):
            spinors.append(Spinor([1.0, -w]))
    return spinors


def resymmetrization_residual(phi: SymSpinor, spinors: list[Spinor]) -> float:
    """Ray distance between phi and the symmetrized product of the spinors,
    as the phase-aligned difference of unit representatives (linearly
    conditioned, so exact matches sit at round-off)."""
    rebuilt = sym_product(*spinors)
    u = phi.to_pure_state().components
    v = rebuilt.to_pure_state().components
    ov = np.vdot(v, u)
    if abs(ov) > 1e-14:
        v = v * (ov / abs(ov))
    return float(np.linalg.norm(u - v))


def conic_discriminant(phi: SymSpinor) -> float:
    """Scale-free discriminant of a rank-2 form: |b^2 - 4ac| / norm^2.
    Vanishes exactly when the two principal spinors coincide (the form sits
    on the coherent conic)."""
    if phi.rank != 2:
        raise DimensionMismatchError("discriminant is defined for rank 2")
    a, b, c = phi.form_coefficients()
    return float(abs(b * b - 4.0 * a * c) / phi.spinor_norm() ** 2)


# ---------------------------------------------------------------------------
# The rank-3 invariant tau and the chord decomposition
# ---------------------------------------------------------------------------

def _tau_lower(psi: SymSpinor) -> np.ndarray:
    """tau_AB = psi_CD(A psi^CD_B), indices lowered with EPSILON."""
    if psi.rank != 3:
        raise DimensionMismatchError("tau is defined for rank 3")
    t = psi.to_tensor()
    e = EPSILON
    lower_all = np.einsum("pqr,pa,qb,rc->abc", t, e, e, e)
    mixed = np.einsum("cdr,rb->cdb", t, e)
    tau = np.einsum("cda,cdb->ab", lower_all, mixed)
    return 0.5 * (tau + tau.T)


def tau(psi: SymSpinor) -> SymSpinor:
    """The rank-2 invariant whose vanishing characterizes the coherent
    (rank-3 Veronese) curve.  Components are returned with indices raised,
    matching the SymSpinor convention; tau_AB psi^{ABC} = 0 identically."""
    low = _tau_lower(psi)
    raised = np.einsum("ac,bd,cd->ab", EPSILON, EPSILON, low)
    return SymSpinor(2, [raised[0, 0], raised[0, 1], raised[1, 1]])


def tau_contraction_residual(psi: SymSpinor) -> float:
    """Scale-free norm of tau_AB psi^{ABC} (an exact spinor identity)."""
    low = _tau_lower(psi)
    contracted = np.einsum("ab,abc->c", low, psi.to_tensor())
    scale = psi.spinor_norm() ** 3
    return float(np.linalg.norm(contracted) / scale)


def tau_magnitude(psi: SymSpinor) -> float:
    """Scale-free size of tau: ||tau|| / ||psi||^2."""
    return float(tau(psi).spinor_norm() / psi.spinor_norm() ** 2)


@dataclass(frozen=True)
class ChordDecomposition:
    """Result of resolving a rank-3 state against the coherent curve.

    branch "generic": psi = u xi^3 + v eta^3 with xi, eta the principal
    spinors of tau (a genuine chord).  branch "tangent": tau has a repeated
    root and psi = sym(xi, xi, eta).  branch "on_curve": psi = xi^3.
    """

    branch: str
    xi: Spinor
    eta: Spinor | None = None
    u: complex | None = None
    v: complex | None = None
    residual: float = 0.0


def _solve_linear_combination(targets: list[np.ndarray], psi: SymSpinor):
    m = np.stack(targets, axis=1)
    sol, *_ = np.linalg.lstsq(m, psi.coeffs, rcond=None)
    resid = np.linalg.norm(m @ sol - psi.coeffs) / np.linalg.norm(psi.coeffs)
    return sol, float(resid)


def chord_decomposition(psi: SymSpinor) -> ChordDecomposition:
    """Classify a rank-3 state against the coherent curve.

    Thresholds (scale-invariant): ||tau||/||psi||^2 < 1e-9 routes to the
    on-curve branch; a tau discriminant below 1e-9 of its norm routes to
    the tangent branch.  The generic branch reconstructs psi from the two
    cube states of tau's principal spinors and reports the relative
    least-squares residual.
    """
    if psi.rank != 3:
        raise DimensionMismatchError("chord decomposition is defined for rank 3")

    if tau_magnitude(psi) < ON_CURVE_TOL:
        # closest coherent state: dominant left singular vector of the
        # (2, 4) flattening, exact for points on the curve
        t2 = psi.to_tensor().reshape(2, 4)
        u_svd, _, _ = np.linalg.svd(t2)
        xi = Spinor(u_svd[:, 0])
        res = resymmetrization_residual(psi, [xi, xi, xi])
        return ChordDecomposition("on_curve", xi=xi, residual=res)

    tau_form = tau(psi)
    roots = principal_spinors(tau_form)
    if conic_discriminant(tau_form) < TANGENT_TOL:
        # repeated contact point: average the two computed root rays
        s1, s2 = roots[0].components, roots[1].components
        phase = np.vdot(s1, s2)
        if abs(phase) > 1e-14:
            s2 = s2 * (abs(phase) / phase)
        xi = Spinor(s1 + s2)
        cols = [sym_product(xi, xi, Spinor(e)).coeffs for e in (np.eye(2))]
        sol, resid = _solve_linear_combination(cols, psi)
        eta = Spinor(sol)
        return ChordDecomposition("tangent", xi=xi, eta=eta, residual=resid)

    xi, eta = roots
    cols = [veronese(xi, 3).coeffs, veronese(eta, 3).coeffs]
    (u, v), resid = _solve_linear_combination(cols, psi)
    return ChordDecomposition(
        "generic", xi=xi, eta=eta, u=complex(u), v=complex(v), residual=resid
    )


# ---------------------------------------------------------------------------
# Spin eigenstates and measurement probabilities
# ---------------------------------------------------------------------------

def spin_eigenstates(axis: Spinor, k: int) -> list[tuple[float, PureState]]:
    """The k+1 spin eigenstates for the axis, as (eigenvalue, state) pairs
    in descending eigenvalue order.

    Spin 1: psi psi (+1), sym(psi, bar) (0), bar bar (-1).
    Spin 3/2: psi^3 (+3/2), sym(psi^2 bar) (+1/2), sym(psi bar^2) (-1/2),
    bar^3 (-3/2), with bar the raised conjugate spinor.  The returned
    states are mutually orthogonal.
    """
    if k not in (2, 3):
        raise ValueError("supported ranks are 2 and 3")
    bar = conjugate_spinor(axis)
    if k == 2:
        triples = [
            (1.0, sym_product(axis, axis)),
            (0.0, sym_product(axis, bar)),
            (-1.0, sym_product(bar, bar)),
        ]
    else:
        triples = [
            (1.5, sym_product(axis, axis, axis)),
            (0.5, sym_product(axis, axis, bar)),
            (-0.5, sym_product(axis, bar, bar)),
            (-1.5, sym_product(bar, bar, bar)),
        ]
    return [(ev, form.to_pure_state()) for ev, form in triples]


def measurement_probabilities(
    state: PureState, eigenstates: list[PureState]
) -> np.ndarray:
    """Outcome probabilities P_i = (1 + cos theta_i) / 2 from the geodesic
    distances to a complete orthogonal eigenstate family; the probabilities
    sum to one and equal the transition probabilities."""
    dim = state.dim
    if len(eigenstates) != dim:
        raise ValueError(f"need {dim} eigenstates to span, got {len(eigenstates)}")
    for i, ei in enumerate(eigenstates):
        if ei.dim != dim:
            raise DimensionMismatchError(f"eigenstate {i} has dim {ei.dim} != {dim}")
        for j in range(i):
            if abs(ei.overlap(eigenstates[j])) > 1e-10:
                raise ValueError(f"eigenstates {j} and {i} are not orthogonal")
    thetas = np.array([geodesic_distance(state, e) for e in eigenstates])
    return 0.5 * (1.0 + np.cos(thetas))
