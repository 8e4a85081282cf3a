"""Hamiltonian dynamics on the quantum phase space.

Two independent routes to the same evolution: exact unitary evolution via
eigendecomposition, and fixed-step RK4 integration of the symplectic
gradient flow dx/dt = (2/hbar) Omega^{ab} d_b H in affine charts (with
re-centering, carried across charts through the exact ray).  The flow
route also covers nonlinear Hamiltonian functions, for which the evolution
is no longer an isometry; the Killing-deviation and characteristic-equation
diagnostics below quantify exactly that distinction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .errors import DimensionMismatchError, StepRejectionError
from .projective import (
    chart_metric,
    chart_metric_inverse,
    chart_partials,
    chart_symplectic_inverse,
    geodesic_distance,
)
from .states import ChartPoint, Observable, PureState, get_default_hbar

DEFAULT_DT = 1e-3
RECENTER_THRESHOLD = 2.0
DRIFT_GUARD = 1e-6


class HamiltonianFunction:
    """A Hamiltonian function on the phase space.

    kind "linear" wraps a Hermitian observable (the Rayleigh quotient);
    kind "nonlinear" is any smooth gauge-invariant scalar of the ray.  The
    canonical nonlinear instance, an integer power of an expectation value,
    keeps a reference to its observable so the compiled kernel can integrate
    it; arbitrary callables integrate through the generic python path.
    """

    __slots__ = ("kind", "observable", "power", "func", "hbar")

    def __init__(self, kind, observable=None, power=1, func=None, hbar=None):
        if kind not in ("linear", "nonlinear"):
            raise ValueError("kind must be 'linear' or 'nonlinear'")
        if kind == "linear" and observable is None:
            raise ValueError("linear Hamiltonians wrap an Observable")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "observable", observable)
        object.__setattr__(self, "power", int(power))
        object.__setattr__(self, "func", func)
        if hbar is None:
            hbar = observable.hbar if observable is not None else get_default_hbar()
        object.__setattr__(self, "hbar", float(hbar))

    def __setattr__(self, name, value):
        raise AttributeError("HamiltonianFunction is immutable")

    @classmethod
    def linear(cls, obs: Observable) -> "HamiltonianFunction":
        return cls("linear", observable=obs, power=1)

    @classmethod
    def expectation_power(cls, obs: Observable, power: int = 2) -> "HamiltonianFunction":
        """H(x) = <A>_x ** power; the power-2 case is the standard smooth
        gauge-invariant non-expectation test Hamiltonian."""
        if power < 2:
            raise ValueError("use linear() for power 1")
        return cls("nonlinear", observable=obs, power=power)

    @classmethod
    def from_callable(cls, func: Callable[[PureState], float],
                      hbar: float | None = None) -> "HamiltonianFunction":
        return cls("nonlinear", func=func, hbar=hbar)

    @property
    def has_kernel_path(self) -> bool:
        return self.observable is not None

    def value(self, state: PureState) -> float:
        if self.observable is not None:
            return self.observable.expectation(state) ** self.power
        return float(self.func(state))

    def value_chart(self, x: ChartPoint) -> float:
        return self.value(x.to_state())


@dataclass(frozen=True)
class Trajectory:
    """Recorded integration output: strictly increasing times, per-record
    chart pivot and coordinates, energy, and the drift |H(t) - H(0)|."""

    times: np.ndarray
    pivots: np.ndarray
    coords: np.ndarray
    energies: np.ndarray

    @property
    def n(self) -> int:
        return self.coords.shape[1] // 2

    def chart(self, i: int) -> ChartPoint:
        return ChartPoint(int(self.pivots[i]), self.coords[i])

    def state(self, i: int) -> PureState:
        return self.chart(i).to_state()

    def final_chart(self) -> ChartPoint:
        return self.chart(len(self.times) - 1)

    def final_state(self) -> PureState:
        return self.state(len(self.times) - 1)

    def energy_drift(self) -> np.ndarray:
        return np.abs(self.energies - self.energies[0])

    def max_drift(self) -> float:
        return float(np.max(self.energy_drift()))


@dataclass(frozen=True)
class SpectralData:
    """Ascending eigenvalues and orthonormal eigenvectors of an observable."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    hbar: float = field(default=1.0)

    @classmethod
    def from_observable(cls, obs: Observable) -> "SpectralData":
        evals, evecs = np.linalg.eigh(obs.matrix)
        data = cls(evals, evecs, hbar=obs.hbar)
        if data.residual(obs) > 1e-10:
            raise RuntimeError("eigendecomposition failed its residual check")
        return data

    def residual(self, obs: Observable) -> float:
        r = obs.matrix @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        ortho = self.eigenvectors.conj().T @ self.eigenvectors - np.eye(len(self.eigenvalues))
        return float(max(np.max(np.abs(r)), np.max(np.abs(ortho))))

    def eigenstate(self, k: int) -> PureState:
        return PureState(self.eigenvectors[:, k])


# ---------------------------------------------------------------------------
# Exact unitary evolution
# ---------------------------------------------------------------------------

def evolve_exact(h: Observable, psi0: PureState, t: float) -> PureState:
    """exp(-i H t / hbar) psi0 via eigendecomposition (norm preserving,
    energy and action variables exactly conserved)."""
    if h.dim != psi0.dim:
        raise DimensionMismatchError("observable/state dimension mismatch")
    spec = SpectralData.from_observable(h)
    amps = spec.eigenvectors.conj().T @ psi0.components
    phases = np.exp(-1j * spec.eigenvalues * t / h.hbar)
    return PureState(spec.eigenvectors @ (phases * amps))


def evolve_exact_many(h: Observable, psi0: PureState, times: np.ndarray) -> np.ndarray:
    """Component array of exp(-i H t_k / hbar) psi0 for every t_k (rows)."""
    spec = SpectralData.from_observable(h)
    amps = spec.eigenvectors.conj().T @ psi0.components
    phases = np.exp(-1j * np.outer(np.asarray(times), spec.eigenvalues) / h.hbar)
    return (phases * amps) @ spec.eigenvectors.T


# ---------------------------------------------------------------------------
# Symplectic gradient flow in charts
# ---------------------------------------------------------------------------

def flow_velocity(h: HamiltonianFunction, x: ChartPoint) -> np.ndarray:
    """The chart velocity (2/hbar) Omega^{ab} d_b H at x."""
    if h.has_kernel_path:
        vel, _ = _kernels.chart_velocity(
            h.observable.matrix, h.power, x.pivot, x.coords, h.hbar
        )
        return vel
    partials = _fd_partials(h, x)
    return (2.0 / h.hbar) * (chart_symplectic_inverse(x) @ partials)


def _fd_partials(h: HamiltonianFunction, x: ChartPoint, step: float = 1e-6) -> np.ndarray:
    scale = step * max(1.0, float(np.max(np.abs(x.coords))))
    out = np.empty(x.coords.size)
    for a in range(x.coords.size):
        xp, xm = x.coords.copy(), x.coords.copy()
        xp[a] += scale
        xm[a] -= scale
        out[a] = (
            h.value_chart(ChartPoint(x.pivot, xp))
            - h.value_chart(ChartPoint(x.pivot, xm))
        ) / (2.0 * scale)
    return out


def _generic_rk4(h: HamiltonianFunction, pivot: int, coords: np.ndarray,
                 t: float, dt: float, record_stride: int):
    """Python-path RK4 for arbitrary callable Hamiltonian functions."""
    import math

    n_steps = max(1, math.ceil(t / dt - 1e-12)) if t > 0 else 0
    step = t / n_steps if n_steps else 0.0
    x = coords.copy()
    rec = [(0.0, pivot, x.copy(), h.value_chart(ChartPoint(pivot, x)))]
    e_prev = rec[0][3]
    for k in range(n_steps):
        def vel(y):
            return flow_velocity(h, ChartPoint(pivot, y))

        k1 = vel(x)
        k2 = vel(x + 0.5 * step * k1)
        k3 = vel(x + 0.5 * step * k2)
        k4 = vel(x + step * k3)
        x = x + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        e_now = h.value_chart(ChartPoint(pivot, x))
        if abs(e_now - e_prev) > DRIFT_GUARD:
            raise StepRejectionError(
                f"energy moved by {abs(e_now - e_prev):.3e} in one step; reduce dt"
            )
        e_prev = e_now
        n = x.size // 2
        z = x[:n] + 1j * x[n:]
        if np.max(np.abs(z)) > RECENTER_THRESHOLD:
            cp = ChartPoint.from_state(ChartPoint(pivot, x).to_state())
            pivot, x = cp.pivot, cp.coords.copy()
        if k == n_steps - 1 or (record_stride > 0 and (k + 1) % record_stride == 0):
            rec.append(((k + 1) * step, pivot, x.copy(), e_now))
    times = np.array([r[0] for r in rec])
    pivots = np.array([r[1] for r in rec], dtype=np.int64)
    coords_arr = np.array([r[2] for r in rec])
    energies = np.array([r[3] for r in rec])
    return times, pivots, coords_arr, energies


def flow_integrate(h: HamiltonianFunction, x0: ChartPoint, t: float,
                   dt: float = DEFAULT_DT, record_stride: int = 1) -> Trajectory:
    """Classic fixed-step RK4 integration of the symplectic gradient flow.

    dt is the maximum step; the actual uniform step is t/ceil(t/dt) so the
    final time is hit exactly.  The chart is re-centered whenever an affine
    coordinate passes magnitude 2 (the ray is carried over exactly), and a
    per-step energy drift above 1e-6 raises StepRejectionError.
    """
    if h.has_kernel_path:
        out = _kernels.rk4_chart_flow(
            h.observable.matrix, h.power, x0.pivot, x0.coords, t, dt, h.hbar,
            recenter=RECENTER_THRESHOLD, drift_tol=DRIFT_GUARD,
            record_stride=record_stride,
        )
    else:
        out = _generic_rk4(h, x0.pivot, x0.coords.copy(), t, dt, record_stride)
    return Trajectory(*out)


def transport_state(h: HamiltonianFunction, state: PureState, t: float,
                    dt: float = DEFAULT_DT) -> PureState:
    """Carry a ray along the Hamiltonian flow for time t."""
    traj = flow_integrate(h, ChartPoint.from_state(state), t, dt, record_stride=0)
    return traj.final_state()


# ---------------------------------------------------------------------------
# Horizontal (phase-preserving) lift
# ---------------------------------------------------------------------------

def _modified_rhs(h: Observable, psi: np.ndarray) -> np.ndarray:
    hp = h.matrix @ psi
    energy = np.real(np.vdot(psi, hp)) / np.real(np.vdot(psi, psi))
    return (-1j / h.hbar) * (hp - energy * psi)


def modified_schrodinger_step(h: Observable, psi: PureState, dt: float) -> PureState:
    """One RK4 step of the traceless-generator evolution
    i hbar dpsi/dt = (H - <H>) psi, whose tangent is horizontal (orthogonal
    to the fibre direction) and whose stationary states are exactly the
    energy eigenstates, phase included."""
    v = psi.components
    k1 = _modified_rhs(h, v)
    k2 = _modified_rhs(h, v + 0.5 * dt * k1)
    k3 = _modified_rhs(h, v + 0.5 * dt * k2)
    k4 = _modified_rhs(h, v + dt * k3)
    return PureState(v + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def horizontality_residual(h: Observable, psi: PureState) -> float:
    """|<psi| dpsi/dt>| of the lift tangent at psi (zero up to round-off)."""
    return abs(np.vdot(psi.components, _modified_rhs(h, psi.components)))


def modified_schrodinger_integrate(h: Observable, psi0: PureState, t: float,
                                   dt: float = DEFAULT_DT):
    """Integrate the horizontal lift; returns (final state with phase,
    max per-step horizontality residual)."""
    import math

    n_steps = max(1, math.ceil(t / dt - 1e-12)) if t > 0 else 0
    step = t / n_steps if n_steps else 0.0
    psi = psi0
    worst = horizontality_residual(h, psi)
    for _ in range(n_steps):
        psi = modified_schrodinger_step(h, psi, step)
        worst = max(worst, horizontality_residual(h, psi))
    return psi, worst


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def speed_check(h: Observable, psi: PureState, dt: float = 1e-6
                ) -> tuple[float, float]:
    """(ds/dt, 2 Delta H): the state-space speed along the exact evolution
    (central difference of the geodesic distance) and twice the energy
    uncertainty; hbar * ds/dt = 2 Delta H."""
    plus = evolve_exact(h, psi, dt)
    minus = evolve_exact(h, psi, -dt)
    ds_dt = geodesic_distance(minus, plus) / (2.0 * dt)
    return float(ds_dt), float(2.0 * np.sqrt(h.variance(psi)))


def action_variables(h: Observable, psi: PureState, degeneracy_tol: float = 1e-10
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Eigenspace populations (distinct energies, projector weights).

    For a nondegenerate spectrum the weights are |<e_k|psi>|^2; eigenvalues
    closer than the tolerance share one projector.  The weights sum to one
    and are constants of the exact evolution (torus confinement)."""
    spec = SpectralData.from_observable(h)
    amps = np.abs(spec.eigenvectors.conj().T @ psi.components) ** 2
    scale = max(1.0, float(np.max(np.abs(spec.eigenvalues))))
    energies, weights = [], []
    i = 0
    while i < len(spec.eigenvalues):
        j = i
        while (j + 1 < len(spec.eigenvalues)
               and spec.eigenvalues[j + 1] - spec.eigenvalues[i] < degeneracy_tol * scale):
            j += 1
        energies.append(float(np.mean(spec.eigenvalues[i:j + 1])))
        weights.append(float(np.sum(amps[i:j + 1])))
        i = j + 1
    return np.asarray(energies), np.asarray(weights)


def frequency_table(spec: SpectralData) -> np.ndarray:
    """Pairwise angular frequencies omega_ij = (E_i - E_j) / hbar."""
    e = spec.eigenvalues
    return (e[:, None] - e[None, :]) / spec.hbar


def subsphere_period(h: Observable, i: int, j: int) -> float:
    """Recover the rotation period of the (i, j) eigen-2-sphere from the
    trajectory itself: the first return time of the equal superposition,
    located by a bounded scalar minimization of the distance to the start."""
    spec = SpectralData.from_observable(h)
    gap = abs(spec.eigenvalues[i] - spec.eigenvalues[j])
    if gap < 1e-12:
        raise ValueError("zero energy gap: the subsphere does not rotate")
    psi0 = PureState(spec.eigenvectors[:, i] + spec.eigenvectors[:, j])
    t_guess = 2.0 * np.pi * h.hbar / gap

    def dist(t):
        return geodesic_distance(psi0, evolve_exact(h, psi0, t))

    res = minimize_scalar(dist, bounds=(0.8 * t_guess, 1.2 * t_guess),
                          method="bounded", options={"xatol": 1e-10})
    return float(res.x)


def killing_deviation(h: HamiltonianFunction, x: ChartPoint,
                      step: float = 1e-5) -> float:
    """Max-norm of the Lie derivative of the metric along the flow field,
    (L_xi g)_ab = xi^c d_c g_ab + g_cb d_a xi^c + g_ac d_b xi^c, by central
    finite differences.  Near zero for linear observables (the flow is an
    isometry); order one for generic nonlinear Hamiltonian functions."""
    m = x.coords.size
    xi = flow_velocity(h, x)
    g = chart_metric(x)
    dg = np.empty((m, m, m))
    dxi = np.empty((m, m))
    for c in range(m):
        xp, xm = x.coords.copy(), x.coords.copy()
        xp[c] += step
        xm[c] -= step
        dg[c] = (chart_metric(ChartPoint(x.pivot, xp))
                 - chart_metric(ChartPoint(x.pivot, xm))) / (2.0 * step)
        dxi[c] = (flow_velocity(h, ChartPoint(x.pivot, xp))
                  - flow_velocity(h, ChartPoint(x.pivot, xm))) / (2.0 * step)
    lie = np.einsum("c,cab->ab", xi, dg)
    lie += np.einsum("cb,ac->ab", g, dxi)
    lie += np.einsum("ac,bc->ab", g, dxi)
    return float(np.max(np.abs(lie)))


def characteristic_residual(h: Observable, x: ChartPoint, outer: float = 1e-4,
                            inner: float = 1e-5) -> float:
    """Residual of the linear-observable characteristic equation
    laplacian(H) = (n+1)(Hbar - H), with the Laplace-Beltrami operator
    evaluated as (1/sqrt(g)) d_a (sqrt(g) g^{ab} d_b H) by nested central
    differences.  Adding a multiple of the identity to H leaves the
    residual unchanged."""
    hf = HamiltonianFunction.linear(h)
    m = x.coords.size

    def flux(coords):
        pt = ChartPoint(x.pivot, coords)
        g = chart_metric(pt)
        ginv = chart_metric_inverse(pt)
        parts = chart_partials(h, pt, step=inner)
        return np.sqrt(np.linalg.det(g)) * (ginv @ parts)

    div = 0.0
    for a in range(m):
        xp, xm = x.coords.copy(), x.coords.copy()
        xp[a] += outer
        xm[a] -= outer
        div += (flux(xp)[a] - flux(xm)[a]) / (2.0 * outer)
    lap = div / np.sqrt(np.linalg.det(chart_metric(x)))
    n_plus_1 = h.dim
    hbar_mean = float(np.real(np.trace(h.matrix))) / n_plus_1
    return float(abs(lap - n_plus_1 * (hbar_mean - hf.value_chart(x))))


def flow_jacobian_determinant(h: HamiltonianFunction, x0: ChartPoint, t: float,
                              dt: float = DEFAULT_DT, fd_step: float = 1e-5) -> float:
    """Determinant of the time-t flow map with respect to the invariant
    (metric) volume: det(DPhi) * sqrt(det g(end) / det g(start)).

    The coordinate Jacobian alone is not chart-invariant; the metric volume
    factor makes the result exactly the symplectic volume distortion, which
    Hamiltonian flows keep at 1."""
    center = flow_integrate(h, x0, t, dt, record_stride=0).final_chart()
    m = x0.coords.size
    jac = np.empty((m, m))
    for a in range(m):
        cols = []
        for sgn in (+1.0, -1.0):
            pert = x0.coords.copy()
            pert[a] += sgn * fd_step
            end = flow_integrate(h, ChartPoint(x0.pivot, pert), t, dt,
                                 record_stride=0).final_state()
            cols.append(ChartPoint.from_state(end, pivot=center.pivot).coords)
        jac[:, a] = (cols[0] - cols[1]) / (2.0 * fd_step)
    vol_start = np.sqrt(np.linalg.det(chart_metric(x0)))
    vol_end = np.sqrt(np.linalg.det(chart_metric(center)))
    return float(np.linalg.det(jac) * vol_end / vol_start)
