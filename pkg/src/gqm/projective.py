"""Fubini-Study geometry on complex projective state space.

Distances come from the transition-probability cross ratio; the chart-level
metric, symplectic form and complex structure are evaluated exactly from the
line element (a bilinear form in the homogeneous differentials, so no finite
differencing enters the metric itself).  The normalization is the one for
which orthogonal rays sit at geodesic distance pi.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateLineError, DimensionMismatchError
from .states import (
    ChartPoint,
    DualState,
    Observable,
    ProjectiveLine,
    PureState,
    _check_same_dim,
)

FD_STEP = 1e-6


def transition_probability(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for unit representatives: the cross ratio
    xi etabar eta xibar / (xi xibar)(eta etabar), gauge invariant."""
    _check_same_dim(a, b)
    return float(min(1.0, abs(a.overlap(b)) ** 2))


def geodesic_distance(a: PureState, b: PureState) -> float:
    """Fubini-Study geodesic distance theta in [0, pi].

    theta = 2 arccos sqrt(transition_probability), evaluated in the
    numerically stable atan2 form: with s = <a|b> and r the component of b
    orthogonal to a, theta = 2 atan2(|r|, |s|).  This keeps full relative
    accuracy for nearly coincident rays (needed by the speed checks).
    """
    _check_same_dim(a, b)
    s = a.overlap(b)
    r = b.components - a.components * s
    return float(2.0 * np.arctan2(np.linalg.norm(r), abs(s)))


def line_join(a: PureState, b: PureState) -> ProjectiveLine:
    """The projective line through two distinct rays, as the bivector
    xi^[a eta^b].  Raises DegenerateLineError for coincident rays."""
    _check_same_dim(a, b)
    if transition_probability(a, b) > 1.0 - 1e-12:
        raise DegenerateLineError("coincident rays do not span a line")
    x, y = a.components, b.components
    return ProjectiveLine(0.5 * (np.outer(x, y) - np.outer(y, x)))


def conjugate_hyperplane(a: PureState) -> DualState:
    """Componentwise conjugate covector: the orthogonal hyperplane of a."""
    return DualState(np.conj(a.components))


def superpose(a: PureState, b: PureState, alpha: complex, beta: complex) -> PureState:
    """The superposition alpha*a + beta*b of the unit representatives."""
    _check_same_dim(a, b)
    return PureState(alpha * a.components + beta * b.components)


def geodesic_between(a: PureState, b: PureState, s: float) -> PureState:
    """Point at arclength fraction s in [0, 1] along the geodesic from a to b.

    Uses the Pancharatnam-gauged representative of b (overlap with a made
    real positive); the resulting curve has constant speed and realizes the
    cross-ratio distance as arclength.
    """
    _check_same_dim(a, b)
    ov = a.overlap(b)
    if abs(ov) < 1e-15:
        # orthogonal endpoints: the geodesic through b itself
        u = b.components
        theta_half = np.pi / 2.0
    else:
        bc = b.components * (abs(ov) / ov)
        u = bc - a.components * abs(ov)
        nu = np.linalg.norm(u)
        if nu < 1e-15:
            return a
        u = u / nu
        theta_half = np.arccos(min(1.0, abs(ov)))
    ang = s * theta_half
    return PureState(np.cos(ang) * a.components + np.sin(ang) * u)


def geodesic_midpoint(a: PureState, b: PureState) -> PureState:
    return geodesic_between(a, b, 0.5)


# ---------------------------------------------------------------------------
# Chart-level Kaehler structure
# ---------------------------------------------------------------------------

def _chart_tangent_frame(x: ChartPoint) -> np.ndarray:
    """Homogeneous differentials dpsi of the 2n chart coordinate directions.

    Row a holds the dpsi vector of d/dx^a: a unit vector at the a-th
    non-pivot slot for the real directions, i times that for the imaginary
    directions.
    """
    n, dim = x.n, x.dim
    idx = [j for j in range(dim) if j != x.pivot]
    frame = np.zeros((2 * n, dim), dtype=np.complex128)
    for a, j in enumerate(idx):
        frame[a, j] = 1.0
        frame[n + a, j] = 1.0j
    return frame


def chart_metric(x: ChartPoint) -> np.ndarray:
    """Fubini-Study metric g_ab on the chart coordinates at x.

    Polarized form of the line element evaluated exactly on the chart frame:
    g(u, v) = (4 / N^2) Re[ N <u|v> - <u|psi><psi|v> ] with N = <psi|psi>
    and psi the homogeneous representative.  Symmetric positive definite;
    at the CP^1 chart origin g = diag(4, 4), and orthogonal rays come out
    at geodesic distance pi.
    """
    psi = x.homogeneous()
    nrm = float(np.real(np.vdot(psi, psi)))
    frame = _chart_tangent_frame(x)
    gram = frame.conj() @ frame.T          # <u_a|u_b>
    proj = frame.conj() @ psi              # <u_a|psi>
    g = (4.0 / nrm ** 2) * np.real(nrm * gram - np.outer(proj, np.conj(proj)))
    return 0.5 * (g + g.T)


def chart_complex_structure(x: ChartPoint) -> np.ndarray:
    """J^a_b: multiplication by i on the affine coordinates.  In the
    [Re; Im] block layout this is the constant matrix [[0, -I], [I, 0]]."""
    n = x.n
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def chart_symplectic(x: ChartPoint) -> np.ndarray:
    """Symplectic form Omega_ab = g_ac J^c_b at x (antisymmetric)."""
    return chart_metric(x) @ chart_complex_structure(x)


def chart_metric_inverse(x: ChartPoint) -> np.ndarray:
    """Closed-form inverse metric g^{ab} (Woodbury form of the chart metric)."""
    n = x.n
    z = x.affine()
    nsq = 1.0 + float(z.real @ z.real + z.imag @ z.imag)
    hinv = nsq * (np.eye(n) + np.outer(np.conj(z), z)) / 4.0
    s, k = hinv.real, hinv.imag
    out = np.empty((2 * n, 2 * n))
    out[:n, :n] = s
    out[:n, n:] = k
    out[n:, :n] = -k
    out[n:, n:] = s
    return out


def chart_symplectic_inverse(x: ChartPoint) -> np.ndarray:
    """Omega^{ab}, the inverse of the chart symplectic form."""
    ginv = chart_metric_inverse(x)
    jmat = chart_complex_structure(x)
    return -jmat @ ginv


# ---------------------------------------------------------------------------
# Scalar observable functions on the chart
# ---------------------------------------------------------------------------

def observable_function(f: Observable, x: ChartPoint) -> float:
    """Rayleigh quotient <psi|F|psi>/<psi|psi> at the ray of x."""
    if f.dim != x.dim:
        raise DimensionMismatchError("observable/chart dimension mismatch")
    psi = x.homogeneous()
    return float(np.real(np.vdot(psi, f.matrix @ psi)) / np.real(np.vdot(psi, psi)))


def chart_partials(f: Observable, x: ChartPoint, step: float | None = None) -> np.ndarray:
    """Lower-index partial derivatives d_a F by central finite differences."""
    if step is None:
        step = FD_STEP * max(1.0, float(np.max(np.abs(x.coords))))
    coords = x.coords
    out = np.empty(coords.size)
    for a in range(coords.size):
        xp, xm = coords.copy(), coords.copy()
        xp[a] += step
        xm[a] -= step
        out[a] = (
            observable_function(f, ChartPoint(x.pivot, xp))
            - observable_function(f, ChartPoint(x.pivot, xm))
        ) / (2.0 * step)
    return out


def chart_partials_analytic(f: Observable, x: ChartPoint) -> np.ndarray:
    """Exact d_a F of the Rayleigh quotient: 2 Re / 2 Im of ((F - F(x)) psi)/N
    on the non-pivot components."""
    psi = x.homogeneous()
    nrm = float(np.real(np.vdot(psi, psi)))
    val = float(np.real(np.vdot(psi, f.matrix @ psi)) / nrm)
    w = (f.matrix @ psi - val * psi) / nrm
    w_np = np.delete(w, x.pivot)
    return np.concatenate([2.0 * w_np.real, 2.0 * w_np.imag])


def gradient(f: Observable, x: ChartPoint, method: str = "fd") -> np.ndarray:
    """Raised gradient F^a = g^{ab} d_b F.

    method "fd" uses central differences for the partials (the default and
    the convention assumed by the tolerances); "analytic" uses the exact
    Rayleigh-quotient derivative, which must agree with "fd" to 1e-6.
    """
    if method == "fd":
        partials = chart_partials(f, x)
    elif method == "analytic":
        partials = chart_partials_analytic(f, x)
    else:
        raise ValueError(f"unknown gradient method {method!r}")
    return chart_metric_inverse(x) @ partials


def projective_schrodinger_residual(h: Observable, psi: PureState, dpsi_dt) -> float:
    """Max-norm residual of the ray-level evolution equation
    i hbar psi^[a dpsi^b] = psi^[a (H psi)^b].

    Vanishes for dpsi_dt = H psi/(i hbar) + lambda psi for any complex
    lambda: the antisymmetrization removes the fibre direction exactly.
    """
    if h.dim != psi.dim:
        raise DimensionMismatchError("observable/state dimension mismatch")
    d = np.asarray(dpsi_dt, dtype=np.complex128)
    if d.shape != psi.components.shape:
        raise DimensionMismatchError("dpsi_dt has the wrong shape")
    v = psi.components
    lhs = 1j * h.hbar * 0.5 * (np.outer(v, d) - np.outer(d, v))
    hv = h.matrix @ v
    rhs = 0.5 * (np.outer(v, hv) - np.outer(hv, v))
    return float(np.max(np.abs(lhs - rhs)))


def rescale_randomly(state: PureState, rng: np.random.Generator) -> PureState:
    """The same ray, handed back through a random nonzero complex rescaling
    (used by the gauge-invariance harness)."""
    c = 0.0
    while abs(c) < 1e-3:
        c = complex(rng.standard_normal(), rng.standard_normal())
    return PureState(c * state.components)
