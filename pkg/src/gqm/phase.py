"""Geometric phase of closed loops on the state space.

The operational definition is the discrete holonomy: the negated argument
of the product of consecutive overlaps around the loop.  Each point enters
once as a bra and once as a ket, so arbitrary per-point phases cancel
identically.  A triangle fan of three-point (Bargmann) phases realizes the
spanning-surface form of the same connection; the two agree modulo 2 pi at
any resolution and the fan is independent of the chosen apex.
"""

from __future__ import annotations

import numpy as np

from .dynamics import HamiltonianFunction, transport_state
from .errors import DimensionMismatchError
from .projective import geodesic_midpoint
from .states import PureState

MIN_OVERLAP = 1e-6


class Loop:
    """An ordered closed loop of rays.

    The closing point may be repeated in the input; it is stored once and
    the closure is implicit.  Consecutive points (including last-to-first)
    must be non-orthogonal so the holonomy factors are defined.
    """

    __slots__ = ("points",)

    def __init__(self, points):
        pts = list(points)
        if len(pts) >= 4 and pts[0].ray_equal(pts[-1], tol=1e-9):
            pts = pts[:-1]
        if len(pts) < 3:
            raise ValueError("a loop needs at least 3 points")
        dim = pts[0].dim
        for i, p in enumerate(pts):
            if p.dim != dim:
                raise DimensionMismatchError(f"loop point {i} has dim {p.dim} != {dim}")
        for i in range(len(pts)):
            ov = abs(pts[i].overlap(pts[(i + 1) % len(pts)]))
            if ov <= MIN_OVERLAP:
                raise ValueError(
                    f"consecutive loop points {i}, {(i + 1) % len(pts)} are "
                    f"(nearly) orthogonal: |overlap| = {ov:.2e}"
                )
        object.__setattr__(self, "points", tuple(p.canonical() for p in pts))

    def __setattr__(self, name, value):
        raise AttributeError("Loop is immutable")

    def __len__(self):
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def reversed(self) -> "Loop":
        return Loop(tuple(reversed(self.points)))

    def refined(self) -> "Loop":
        """Insert the Fubini-Study geodesic midpoint on every edge."""
        out = []
        m = len(self.points)
        for i in range(m):
            a, b = self.points[i], self.points[(i + 1) % m]
            out.append(a)
            out.append(geodesic_midpoint(a, b))
        return Loop(out)

    def transported(self, h: HamiltonianFunction, t: float, dt: float = 1e-3) -> "Loop":
        """The image loop under the time-t Hamiltonian flow."""
        return Loop([transport_state(h, p, t, dt) for p in self.points])


def wrap_angle(beta: float) -> float:
    """Reduce an angle to (-pi, pi]."""
    out = np.remainder(beta + np.pi, 2.0 * np.pi) - np.pi
    return float(np.pi if out == -np.pi else out)


def angle_difference(a: float, b: float) -> float:
    """|a - b| modulo 2 pi, folded to [0, pi]."""
    return abs(wrap_angle(a - b))


def holonomy_phase(loop: Loop) -> float:
    """beta = -arg prod_k <psi_k | psi_{k+1}> in (-pi, pi].

    Exactly invariant under per-point regauging; reversing the loop
    orientation negates beta."""
    total = 0.0
    m = len(loop.points)
    for i in range(m):
        ov = loop.points[i].overlap(loop.points[(i + 1) % m])
        total -= np.angle(ov)
    return wrap_angle(total)


def holonomy_phase_refined(loop: Loop, tol: float = 1e-7, max_doublings: int = 12
                           ) -> tuple[float, Loop]:
    """Refine along geodesics until the phase moves less than tol per
    doubling; returns the converged phase and the refined loop."""
    beta = holonomy_phase(loop)
    for _ in range(max_doublings):
        finer = loop.refined()
        beta_new = holonomy_phase(finer)
        if angle_difference(beta_new, beta) < tol:
            return beta_new, finer
        loop, beta = finer, beta_new
    return beta, loop


def surface_phase(loop: Loop, base: PureState) -> float:
    """Spanning-surface phase as the geodesic triangle fan from base:
    the sum of Bargmann three-point phases
    -arg(<b|p_k><p_k|p_{k+1}><p_{k+1}|b>), accumulated as reals in loop
    order.  Equals the holonomy modulo 2 pi for any admissible base."""
    if base.dim != loop.dim:
        raise DimensionMismatchError("base/loop dimension mismatch")
    b = base.canonical()
    m = len(loop.points)
    for i, p in enumerate(loop.points):
        if abs(b.overlap(p)) <= MIN_OVERLAP:
            raise ValueError(f"base is (nearly) orthogonal to loop point {i}")
    total = 0.0
    for i in range(m):
        p, q = loop.points[i], loop.points[(i + 1) % m]
        tri = b.overlap(p) * p.overlap(q) * q.overlap(b)
        total -= np.angle(tri)
    return total


def poincare_invariant_check(loop: Loop, h: HamiltonianFunction, t: float,
                             dt: float = 1e-3) -> tuple[float, float]:
    """(beta before, beta after) transporting every loop point by the
    time-t Hamiltonian flow.  The difference vanishes modulo 2 pi for any
    Hamiltonian flow, linear or not, because the flow preserves the
    symplectic form."""
    before = holonomy_phase(loop)
    after = holonomy_phase(loop.transported(h, t, dt))
    return before, after
