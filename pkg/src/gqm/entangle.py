"""Entanglement geometry for bipartite pure states.

The two-qubit disentangled states form a quadric surface (the Segre image
of CP^1 x CP^1); the geodesic distance delta from a state to that surface
has a closed form through the quadric invariant q, and the nearest and
farthest disentangled states are the roots of a quadratic in the pencil
spanned by the state and the polar point of its conjugate plane.  A grid
plus alternating-ascent brute-force optimizer provides the independent
oracle for all of it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateQuadricError,
    DimensionMismatchError,
    MaximalEntanglementError,
    ValidationError,
)
from .projective import line_join, transition_probability
from .spinors import EPSILON, Spinor, conjugate_spinor
from .states import DualState, PureState

MAXIMAL_Q_TOL = 1e-9          # |q| above 1 - tol routes to the maximal branch
ON_QUADRIC_TOL = 1e-13


class BipartiteSpace(NamedTuple):
    """Subsystem dimensions (j+1, k+1) with row-major index flattening."""

    dim_a: int
    dim_b: int

    @property
    def total_dim(self) -> int:
        return self.dim_a * self.dim_b

    def flatten_index(self, a: int, b: int) -> int:
        return a * self.dim_b + b

    def unflatten(self, alpha: int) -> tuple[int, int]:
        return divmod(alpha, self.dim_b)

    def as_matrix(self, state: PureState) -> np.ndarray:
        if state.dim != self.total_dim:
            raise DimensionMismatchError(
                f"state dim {state.dim} != {self.dim_a}x{self.dim_b}"
            )
        return state.components.reshape(self.dim_a, self.dim_b)


TWO_QUBITS = BipartiteSpace(2, 2)


class Quadric:
    """A symmetric nondegenerate quadric Q_ab with real entries (the
    Hermitian condition Q = conj(Q)), together with its inverse."""

    __slots__ = ("matrix", "inverse")

    def __init__(self, matrix):
        q = np.asarray(matrix, dtype=np.complex128)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError("quadric must be a square matrix")
        scale = max(1.0, float(np.max(np.abs(q))))
        if np.max(np.abs(q - q.T)) > 1e-12 * scale:
            raise ValueError("quadric must be symmetric")
        if np.max(np.abs(q.imag)) > 1e-12 * scale:
            raise ValueError("quadric must equal its complex conjugate")
        q = 0.5 * (q + q.T)
        try:
            inv = np.linalg.inv(q)
        except np.linalg.LinAlgError:
            raise DegenerateQuadricError("quadric matrix is singular") from None
        if np.linalg.cond(q) > 1e12:
            raise DegenerateQuadricError("quadric matrix is numerically singular")
        q.flags.writeable = False
        inv.flags.writeable = False
        object.__setattr__(self, "matrix", q)
        object.__setattr__(self, "inverse", inv)

    def __setattr__(self, name, value):
        raise AttributeError("Quadric is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def evaluate(self, x, y=None) -> complex:
        """The bilinear value Q(x, y) = Q_ab x^a y^b (y defaults to x)."""
        xa = x.components if isinstance(x, PureState) else np.asarray(x)
        ya = xa if y is None else (y.components if isinstance(y, PureState) else np.asarray(y))
        return complex(xa @ self.matrix @ ya)

    def q_invariant(self, psi: PureState) -> complex:
        """q = Q(psi, psi) / <psi|psi> for the unit representative."""
        return self.evaluate(psi)

    def on_quadric_residual(self, psi: PureState) -> float:
        return abs(self.q_invariant(psi))

    @staticmethod
    def two_qubit() -> "Quadric":
        """The disentanglement quadric eps x eps of a pair of qubits;
        Q(psi, psi) is twice the determinant of the 2x2 component matrix."""
        return Quadric(np.kron(EPSILON, EPSILON))


_TWO_QUBIT_QUADRIC = Quadric.two_qubit()


def singlet_state() -> PureState:
    return PureState(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2.0))


def segre_embed(a: PureState, b: PureState) -> PureState:
    """psi^{AB} = xi^A eta^B, flattened row-major; lies on the Segre variety."""
    return PureState(np.kron(a.components, b.components))


def segre_minor_residual(psi: PureState, space: BipartiteSpace) -> float:
    """Largest normalized 2x2 minor of the component matrix; zero exactly
    on the Segre variety (product states)."""
    m = space.as_matrix(psi)
    worst = 0.0
    for j in range(space.dim_a):
        for k in range(j + 1, space.dim_a):
            for l in range(space.dim_b):
                for mm in range(l + 1, space.dim_b):
                    minor = m[j, l] * m[k, mm] - m[j, mm] * m[k, l]
                    worst = max(worst, abs(minor))
    return worst / float(np.max(np.abs(m)) ** 2)


@dataclass(frozen=True)
class EntanglementReport:
    """Closed-form entanglement summary of a two-qubit state."""

    delta: float
    gamma: float
    rho: float
    kappa: float
    lambda_abs: float
    nearest: PureState
    farthest: PureState


def polar_plane(xi: PureState, quadric: Quadric) -> DualState:
    """The polar covector Q_ab xi^b of a point."""
    if xi.dim != quadric.dim:
        raise DimensionMismatchError("state/quadric dimension mismatch")
    return DualState(quadric.matrix @ xi.components)


def polar_point(eta: DualState, quadric: Quadric) -> PureState:
    """The polar point Q^{ab} eta_b of a plane (inverse of polar_plane)."""
    if eta.dim != quadric.dim:
        raise DimensionMismatchError("covector/quadric dimension mismatch")
    return PureState(quadric.inverse @ eta.covector)


def conjugate_polar_point(psi: PureState, quadric: Quadric) -> np.ndarray:
    """Q^{ab} conj(psi)_b, the polar point of the conjugate hyperplane
    (unnormalized components)."""
    return quadric.inverse @ np.conj(psi.components)


def nearest_farthest(psi: PureState, quadric: Quadric | None = None
                     ) -> tuple[PureState, PureState]:
    """Nearest and farthest points of the quadric along the distinguished
    line through psi and the polar point of its conjugate plane.

    Both returned states satisfy Q(X, X) = 0; the branches are the two
    roots mu = (-1 +- sqrt(1 - q qbar)) / q of the incidence quadratic,
    evaluated in cancellation-free form, and are labelled nearest/farthest
    by explicit transition-probability comparison rather than by root sign.
    Raises MaximalEntanglementError when the roots merge (|q| = 1).
    """
    quadric = _TWO_QUBIT_QUADRIC if quadric is None else quadric
    if psi.dim != quadric.dim:
        raise DimensionMismatchError("state/quadric dimension mismatch")
    q = quadric.q_invariant(psi)
    aq = abs(q)
    tilde = conjugate_polar_point(psi, quadric)
    if aq < ON_QUADRIC_TOL:
        # the state lies on the quadric: it is its own nearest point
        return psi, PureState(tilde)
    if aq > 1.0 - MAXIMAL_Q_TOL:
        raise MaximalEntanglementError(
            f"|q| = {aq:.12f}: the mu roots merge; use maximal_family"
        )
    s = np.sqrt(max(0.0, 1.0 - aq * aq))
    mu_plus = -np.conj(q) / (1.0 + s)           # (-1 + sqrt(1-q qbar)) / q
    inv_mu_minus = q / (-1.0 - s)               # 1 / ((-1 - sqrt(...)) / q)
    x1 = PureState(mu_plus * psi.components + tilde)
    x2 = PureState(psi.components + inv_mu_minus * tilde)
    if transition_probability(psi, x1) >= transition_probability(psi, x2):
        return x1, x2
    return x2, x1


def entanglement_measure(psi: PureState, quadric: Quadric | None = None
                         ) -> EntanglementReport:
    """Closed-form geodesic entanglement of a two-qubit state.

    rho = |q|^2, gamma = sqrt(1 - rho), kappa = (1 + gamma)/2 and
    delta = arccos(gamma) in [0, pi/2]; |lambda| = sqrt(kappa/(1-kappa)).
    For maximally entangled inputs the extremal states are degenerate and
    representatives are taken from the brute-force maximizer.
    """
    quadric = _TWO_QUBIT_QUADRIC if quadric is None else quadric
    if psi.dim != 4:
        raise DimensionMismatchError("the closed form applies to 2x2 states")
    q = quadric.q_invariant(psi)
    rho = min(1.0, abs(q) ** 2)
    gamma = float(np.sqrt(max(0.0, 1.0 - rho)))
    delta = float(np.arccos(min(1.0, gamma)))
    kappa = 0.5 * (1.0 + gamma)
    lam = float(np.sqrt(kappa / (1.0 - kappa))) if kappa < 1.0 else np.inf
    try:
        near, far = nearest_farthest(psi, quadric)
    except MaximalEntanglementError:
        _, xi, eta = _kappa_maximize(psi, TWO_QUBITS, seed=0)
        near = segre_embed(PureState(xi), PureState(eta))
        far = PureState(conjugate_polar_point(near, quadric))
    return EntanglementReport(
        delta=delta, gamma=gamma, rho=rho, kappa=kappa,
        lambda_abs=lam, nearest=near, farthest=far,
    )


def maximal_family(x: PureState, theta: float, quadric: Quadric | None = None
                   ) -> PureState:
    """e^{i theta} X + e^{-i theta} Q^{ab} conj(X)_b for X on the quadric:
    a maximally entangled, self-conjugate state at distance pi/2 from X."""
    quadric = _TWO_QUBIT_QUADRIC if quadric is None else quadric
    if quadric.on_quadric_residual(x) > 1e-10:
        raise ValidationError("maximal_family: X is not on the quadric")
    tilde = conjugate_polar_point(x, quadric)
    return PureState(np.exp(1j * theta) * x.components + np.exp(-1j * theta) * tilde)


def self_conjugacy_residual(psi: PureState, quadric: Quadric | None = None) -> float:
    """Ray misalignment between conj(psi) and Q psi (zero iff self-conjugate).

    Computed as the norm of the phase-aligned difference of the unit
    representatives; unlike 1 - |overlap|^2 forms this is linearly
    conditioned, so exact constructions sit at round-off."""
    quadric = _TWO_QUBIT_QUADRIC if quadric is None else quadric
    u = np.conj(psi.components)
    v = quadric.matrix @ psi.components
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    ov = np.vdot(v, u)
    if abs(ov) > 1e-14:
        v = v * (ov / abs(ov))
    return float(np.linalg.norm(u - v))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _sphere_spinors(m: int) -> np.ndarray:
    """m x m grid of unit spinors over the Bloch sphere."""
    thetas = np.linspace(0.0, np.pi, m)
    phis = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    out = np.empty((m * m, 2), dtype=np.complex128)
    out[:, 0] = np.cos(0.5 * tt).ravel()
    out[:, 1] = (np.sin(0.5 * tt) * np.exp(1j * pp)).ravel()
    return out


def _kappa_maximize(psi: PureState, space: BipartiteSpace, seed: int = 0,
                    grid: int = 24, starts: int = 32, tol: float = 1e-12,
                    max_iter: int = 500):
    """Maximize the transition probability to a product state.

    Coarse grid over the subsystem spheres (qubit factors) or seeded random
    starts (larger factors), then alternating exact maximization over each
    factor from the best `starts` candidates, stopping when no start
    improves by more than tol.  Deterministic for fixed arguments.
    """
    if space.dim_a > 4 or space.dim_b > 4:
        raise ValueError("brute force oracle is guarded to subsystem dims <= 4")
    m = space.as_matrix(psi)
    rng = np.random.default_rng(seed)

    if space == TWO_QUBITS:
        g = _sphere_spinors(grid)
        overlaps = np.conj(g) @ m @ np.conj(g).T
        kap = np.abs(overlaps) ** 2
        flat = np.argsort(kap.ravel())[::-1][:starts]
        rows, cols = np.unravel_index(flat, kap.shape)
        xis = g[rows].copy()
        etas = g[cols].copy()
    else:
        xis = rng.standard_normal((starts, space.dim_a)) + 1j * rng.standard_normal(
            (starts, space.dim_a))
        etas = rng.standard_normal((starts, space.dim_b)) + 1j * rng.standard_normal(
            (starts, space.dim_b))
        xis /= np.linalg.norm(xis, axis=1, keepdims=True)
        etas /= np.linalg.norm(etas, axis=1, keepdims=True)

    def kappas(x, e):
        return np.abs(np.einsum("si,ij,sj->s", np.conj(x), m, np.conj(e))) ** 2

    best = kappas(xis, etas)
    for _ in range(max_iter):
        xis = (m @ np.conj(etas).T).T
        xis /= np.linalg.norm(xis, axis=1, keepdims=True)
        etas = (m.T @ np.conj(xis).T).T
        etas /= np.linalg.norm(etas, axis=1, keepdims=True)
        now = kappas(xis, etas)
        if np.max(now - best) < tol:
            best = now
            break
        best = now
    k = int(np.argmax(best))
    return float(best[k]), xis[k], etas[k]


def brute_force_delta(psi: PureState, space: BipartiteSpace | None = None,
                      seed: int = 0) -> float:
    """Independent geodesic-entanglement oracle: arccos(2 kappa_max - 1)
    with kappa_max from the grid/alternating-ascent maximizer."""
    space = space or TWO_QUBITS
    if psi.dim != space.total_dim:
        raise DimensionMismatchError("state does not match the bipartite space")
    kappa_max, _, _ = _kappa_maximize(psi, space, seed=seed)
    return float(np.arccos(np.clip(2.0 * kappa_max - 1.0, -1.0, 1.0)))


# ---------------------------------------------------------------------------
# Singlet measurement geometry and the maximal manifold probe
# ---------------------------------------------------------------------------

class SingletMeasurement(NamedTuple):
    outcome_up_down: PureState
    outcome_down_up: PureState
    probabilities: tuple[float, float]


def singlet_measurement(axis: Spinor) -> SingletMeasurement:
    """Product outcome states of a first-factor spin measurement on the
    singlet, for the given axis: psi x bar(psi) and bar(psi) x psi, each
    with probability 1/2.  Both lie on the quadric, and the line joining
    the singlet to the S_z = 0 triplet state meets the quadric at exactly
    these two points."""
    bar = conjugate_spinor(axis)
    up = axis.to_state()
    down = bar.to_state()
    out1 = segre_embed(up, down)
    out2 = segre_embed(down, up)
    z = singlet_state()
    p1 = transition_probability(z, out1)
    p2 = transition_probability(z, out2)
    return SingletMeasurement(out1, out2, (float(p1), float(p2)))


def triplet_zero_state(axis: Spinor) -> PureState:
    """The S_z = 0 triplet ray for the axis: sym(psi, bar(psi)) in the
    two-particle (distinguishable) tensor space."""
    p = axis.components
    pb = conjugate_spinor(axis).components
    return PureState(0.5 * (np.kron(p, pb) + np.kron(pb, p)))


def singlet_triplet_line(axis: Spinor):
    """The projective line joining the singlet to the S_z = 0 triplet."""
    return line_join(singlet_state(), triplet_zero_state(axis))


@dataclass(frozen=True)
class ManifoldProbe:
    samples: int
    max_self_conjugacy_residual: float
    max_delta_error: float
    tangent_ranks: tuple[int, ...]


def _self_conjugacy_constraint(coords: np.ndarray, pivot: int,
                               quadric: Quadric) -> np.ndarray:
    """Real residual vector of the self-conjugacy condition at chart coords."""
    n = coords.size // 2
    z = coords[:n] + 1j * coords[n:]
    psi = np.empty(n + 1, dtype=np.complex128)
    psi[pivot] = 1.0
    psi[[j for j in range(n + 1) if j != pivot]] = z
    psi = psi / np.linalg.norm(psi)
    c = quadric.inverse @ np.conj(psi)
    r = c - psi * np.vdot(psi, c)
    return np.concatenate([r.real, r.imag])


def maximal_manifold_probe(samples: int, seed: int = 0,
                           rank_points: int = 20) -> ManifoldProbe:
    """Sample the maximal-entanglement family and verify that every sample
    is self-conjugate at distance pi/2 from the quadric; estimate the local
    dimension by the numerical rank of the self-conjugacy constraint
    Jacobian (3 = codimension in CP^3).

    The distance is verified through the brute-force maximizer as
    arccos(2 kappa_max - 1): near rho = 1 the closed form arccos(sqrt(1-rho))
    has square-root conditioning and cannot resolve pi/2 beyond ~1e-8 in
    double precision, while the kappa route is linearly conditioned."""
    rng = np.random.default_rng(seed)
    quadric = _TWO_QUBIT_QUADRIC
    worst_sc = 0.0
    worst_delta = 0.0
    ranks = []
    for i in range(samples):
        x = segre_embed(Spinor.random(rng).to_state(), Spinor.random(rng).to_state())
        psi = maximal_family(x, rng.uniform(0.0, 2.0 * np.pi), quadric)
        worst_sc = max(worst_sc, self_conjugacy_residual(psi, quadric))
        kappa_max, _, _ = _kappa_maximize(psi, TWO_QUBITS, seed=i)
        delta = float(np.arccos(np.clip(2.0 * kappa_max - 1.0, -1.0, 1.0)))
        worst_delta = max(worst_delta, abs(delta - 0.5 * np.pi))
        if i < rank_points:
            pivot = int(np.argmax(np.abs(psi.components)))
            comps = psi.components / psi.components[pivot]
            zz = np.delete(comps, pivot)
            coords = np.concatenate([zz.real, zz.imag])
            h = 1e-5
            jac = np.empty((8, 6))
            for a in range(6):
                cp, cm = coords.copy(), coords.copy()
                cp[a] += h
                cm[a] -= h
                jac[:, a] = (
                    _self_conjugacy_constraint(cp, pivot, quadric)
                    - _self_conjugacy_constraint(cm, pivot, quadric)
                ) / (2.0 * h)
            sv = np.linalg.svd(jac, compute_uv=False)
            ranks.append(int(np.sum(sv > 1e-6 * sv[0])))
    return ManifoldProbe(samples, worst_sc, worst_delta, tuple(ranks))
