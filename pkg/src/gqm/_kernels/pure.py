"""Pure numpy implementation of the hot flow kernel.

Semantics are shared with the compiled twin in ``_flowext``: a classic
fixed-step 4th-order integration of the symplectic gradient flow

    dx/dt = (2/hbar) * Omega^{ab} d_b H

in an affine chart of CP^n, for Hamiltonian functions of the form
H(x) = E(x)**power with E the Rayleigh quotient of a Hermitian matrix.
The chart velocity below is the closed form of that expression: contracting
the inverse symplectic structure (obtained from the Fubini-Study metric via
the complex structure) with the exact gradient of E**power collapses, in
complex chart coordinates z, to

    dz/dt = -(i * power * E**(power-1) / hbar) * (u_np + z (zbar . u_np) - E N z)

with u = A psi, psi the homogeneous representative (pivot component 1),
u_np its non-pivot part and N = psi^dag psi.  The identity is exercised
against the assembled matrix expression in the test suite.

The chart is re-centered on the largest homogeneous component whenever any
affine coordinate passes the threshold; the ray is carried across exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import StepRejectionError

BACKEND = "python"


def _split(coords: np.ndarray) -> np.ndarray:
    n = coords.size // 2
    return coords[:n] + 1j * coords[n:]


def _join(z: np.ndarray) -> np.ndarray:
    return np.concatenate([z.real, z.imag])


def _nonpivot_index(dim: int, pivot: int) -> np.ndarray:
    return np.array([j for j in range(dim) if j != pivot], dtype=np.intp)


def _velocity_z(a: np.ndarray, power: int, hbar: float, pivot: int,
                z: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, float]:
    """Complex chart velocity dz/dt and the energy H = E**power at z."""
    dim = a.shape[0]
    psi = np.empty(dim, dtype=np.complex128)
    psi[pivot] = 1.0
    psi[idx] = z
    u = a @ psi
    u_np = u[idx]
    s = np.vdot(z, u_np)                      # zbar . u_np
    nsq = 1.0 + float(z.real @ z.real + z.imag @ z.imag)
    e0n = (u[pivot] + s).real                 # E * N, real for Hermitian a
    e0 = e0n / nsq
    fp = 1.0 if power == 1 else power * e0 ** (power - 1)
    zdot = (-1j * fp / hbar) * (u_np + z * s - e0n * z)
    return zdot, e0 ** power


def chart_velocity(a: np.ndarray, power: int, pivot: int, coords: np.ndarray,
                   hbar: float) -> tuple[np.ndarray, float]:
    """Real 2n chart velocity of the symplectic gradient flow, plus energy."""
    a = np.asarray(a, dtype=np.complex128)
    coords = np.asarray(coords, dtype=np.float64)
    idx = _nonpivot_index(a.shape[0], pivot)
    zdot, energy = _velocity_z(a, power, hbar, pivot, _split(coords), idx)
    return _join(zdot), energy


def _recenter(pivot: int, z: np.ndarray, idx: np.ndarray, dim: int
              ) -> tuple[int, np.ndarray, np.ndarray]:
    psi = np.empty(dim, dtype=np.complex128)
    psi[pivot] = 1.0
    psi[idx] = z
    new_pivot = int(np.argmax(np.abs(psi)))
    if new_pivot == pivot:
        return pivot, z, idx
    new_idx = _nonpivot_index(dim, new_pivot)
    return new_pivot, psi[new_idx] / psi[new_pivot], new_idx


def rk4_chart_flow(a, power: int, pivot: int, coords, t: float, dt: float,
                   hbar: float, recenter: float = 2.0, drift_tol: float = 1e-6,
                   record_stride: int = 1):
    """Integrate the chart flow from (pivot, coords) for time t.

    Returns (times, pivots, coords_rows, energies) covering the recorded
    steps; the initial point and the final point are always recorded.  With
    record_stride = 0 only those two rows are returned.  Raises
    StepRejectionError when the energy moves by more than drift_tol in a
    single step.
    """
    a = np.asarray(a, dtype=np.complex128)
    coords = np.asarray(coords, dtype=np.float64)
    dim = a.shape[0]
    n2 = coords.size
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")
    n_steps = max(1, math.ceil(t / dt - 1e-12)) if t > 0 else 0
    h = t / n_steps if n_steps else 0.0

    idx = _nonpivot_index(dim, pivot)
    z = _split(coords)

    rec_t, rec_p, rec_x, rec_e = [], [], [], []

    def record(time, piv, zz, energy):
        rec_t.append(time)
        rec_p.append(piv)
        rec_x.append(_join(zz))
        rec_e.append(energy)

    _, e_prev = _velocity_z(a, power, hbar, pivot, z, idx)
    record(0.0, pivot, z, e_prev)

    for k in range(n_steps):
        k1, _ = _velocity_z(a, power, hbar, pivot, z, idx)
        k2, _ = _velocity_z(a, power, hbar, pivot, z + 0.5 * h * k1, idx)
        k3, _ = _velocity_z(a, power, hbar, pivot, z + 0.5 * h * k2, idx)
        k4, _ = _velocity_z(a, power, hbar, pivot, z + h * k3, idx)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _, e_now = _velocity_z(a, power, hbar, pivot, z, idx)
        if abs(e_now - e_prev) > drift_tol:
            raise StepRejectionError(
                f"energy moved by {abs(e_now - e_prev):.3e} in one step "
                f"(> {drift_tol:.1e}); reduce dt={dt}"
            )
        e_prev = e_now
        if np.max(np.abs(z)) > recenter:
            pivot, z, idx = _recenter(pivot, z, idx, dim)
        last = k == n_steps - 1
        if last or (record_stride > 0 and (k + 1) % record_stride == 0):
            record((k + 1) * h, pivot, z, e_now)

    return (
        np.asarray(rec_t, dtype=np.float64),
        np.asarray(rec_p, dtype=np.int64),
        np.asarray(rec_x, dtype=np.float64).reshape(len(rec_t), n2),
        np.asarray(rec_e, dtype=np.float64),
    )
