"""Geometric uncertainty: variance as squared gradient length, Poisson
brackets from the symplectic form, the Kaehler inequality with its
Heisenberg corollary, central moments, and the moment-corrected bound.

The identity (Delta F)^2 = g_ab F^a F^b (geometric variance equals operator
variance) is the module's core oracle and fixes the metric normalization;
the single constant relating the Omega-bracket to the expectation of the
operator commutator is measured once on spin-1/2 and asserted globally.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .errors import InvalidMomentsError
from .projective import chart_metric, chart_metric_inverse, chart_partials, chart_symplectic
from .states import ChartPoint, Observable, PureState, get_default_hbar


def geometric_variance(f: Observable, x: ChartPoint) -> float:
    """(Delta F)^2 = g_ab F^a F^b, the squared length of the gradient of
    the level surfaces of F through x; equals <F^2> - <F>^2 at the ray."""
    partials = chart_partials(f, x)
    return float(partials @ chart_metric_inverse(x) @ partials)


def operator_variance(f: Observable, x: ChartPoint) -> float:
    """<F^2> - <F>^2 at the ray of x (the independent oracle)."""
    return f.variance(x.to_state())


def poisson_bracket(f: Observable, g: Observable, x: ChartPoint) -> float:
    """[F, G] = Omega_ab F^a G^b with F^a = g^{ab} d_b F.

    Antisymmetric, and proportional to the expectation of the operator
    commutator: [F, G] = c <FG - GF> / (i hbar) with the calibrated
    constant c = bracket_commutator_constant()."""
    ginv = chart_metric_inverse(x)
    fa = ginv @ chart_partials(f, x)
    ga = ginv @ chart_partials(g, x)
    return float(fa @ chart_symplectic(x) @ ga)


def commutator_expectation(f: Observable, g: Observable, state: PureState) -> float:
    """<(FG - GF)> / (i hbar), a real number for Hermitian F, G."""
    psi = state.components
    comm = f.matrix @ (g.matrix @ psi) - g.matrix @ (f.matrix @ psi)
    return float(np.real(np.vdot(psi, comm) / (1j * f.hbar)))


def bracket_commutator_constant(hbar: float | None = None) -> float:
    """The global constant c in [F, G]_Omega = c <[F, G]> / (i hbar),
    measured once on CP^1 with the spin operators at a generic point."""
    return _measure_bracket_constant(get_default_hbar() if hbar is None else hbar)


@lru_cache(maxsize=8)
def _measure_bracket_constant(hbar: float) -> float:
    sx = Observable(0.5 * np.array([[0, 1], [1, 0]], dtype=complex), hbar=hbar)
    sy = Observable(0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex), hbar=hbar)
    x = ChartPoint(0, np.array([0.31, -0.27]))
    bracket = poisson_bracket(sx, sy, x)
    comm = commutator_expectation(sx, sy, x.to_state())
    return float(bracket / comm)


class KahlerTerms(NamedTuple):
    """Ingredients of the pointwise inequality
    (g F F)(g G G) >= (g F G)^2 + (Omega F G)^2 / 4."""

    lhs: float          # (g_ab F^a F^b)(g_ab G^a G^b)
    cross_g: float      # g_ab F^a G^b
    cross_omega: float  # Omega_ab F^a G^b

    @property
    def rhs(self) -> float:
        return self.cross_g ** 2 + 0.25 * self.cross_omega ** 2

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def heisenberg_bound(self) -> float:
        """The corollary bound (drop the metric cross term):
        (Delta F)^2 (Delta G)^2 >= |[F, G]|^2 / 4."""
        return 0.25 * self.cross_omega ** 2


def kahler_inequality_terms(f: Observable, g: Observable, x: ChartPoint) -> KahlerTerms:
    ginv = chart_metric_inverse(x)
    gmat = chart_metric(x)
    omega = chart_symplectic(x)
    fa = ginv @ chart_partials(f, x)
    ga = ginv @ chart_partials(g, x)
    return KahlerTerms(
        lhs=float((fa @ gmat @ fa) * (ga @ gmat @ ga)),
        cross_g=float(fa @ gmat @ ga),
        cross_omega=float(fa @ omega @ ga),
    )


# ---------------------------------------------------------------------------
# Central moments and the generalized bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSet:
    """Central moments of an observable in a state: mean and mu_2,4,6."""

    mean: float
    mu2: float
    mu4: float
    mu6: float

    def __post_init__(self):
        if self.mu2 < -1e-12:
            raise InvalidMomentsError("mu2 must be nonnegative")
        scale = max(self.mu2, 1e-300) ** 3
        if self.mu6 * self.mu2 - self.mu4 ** 2 < -1e-9 * scale:
            raise InvalidMomentsError("mu6 mu2 - mu4^2 violates Hankel positivity")


def central_moments(f: Observable, psi: PureState, up_to: int = 6) -> MomentSet:
    """mu_k = <(F - <F>)^k> for k = 2, 4, 6 by repeated matrix application."""
    if up_to < 6:
        raise ValueError("the moment set carries mu_2, mu_4, mu_6")
    mean = f.expectation(psi)
    centered = f.matrix - mean * np.eye(f.dim)
    v = psi.components
    powers = [v]
    for _ in range(3):
        powers.append(centered @ powers[-1])
    # <(F - mean)^k> = <v_(k/2), v_(k/2)> for even k, with v_j = centered^j v
    mu2 = float(np.real(np.vdot(powers[1], powers[1])))
    mu4 = float(np.real(np.vdot(powers[2], powers[2])))
    mu6 = float(np.real(np.vdot(powers[3], powers[3])))
    return MomentSet(mean=mean, mu2=mu2, mu4=mu4, mu6=mu6)


@dataclass(frozen=True)
class GeneralizedBound:
    """Moment-corrected uncertainty bound; degenerate means the correction
    denominator vanished and the base bound hbar^2/4 was returned."""

    value: float
    degenerate: bool


def generalized_heisenberg_bound(moments: MomentSet, hbar: float | None = None
                                 ) -> GeneralizedBound:
    """hbar^2/4 * (1 + (mu4 - 3 mu2^2)^2 / (mu6 mu2 - mu4^2)) for conjugate
    pairs, guarded by the scale-relative denominator threshold
    1e-10 * mu2^3.  Always at least the base bound hbar^2/4, and exactly
    the base bound at Gaussian moment ratios."""
    hbar = get_default_hbar() if hbar is None else hbar
    base = 0.25 * hbar * hbar
    denom = moments.mu6 * moments.mu2 - moments.mu4 ** 2
    guard = 1e-10 * max(moments.mu2, 0.0) ** 3
    if denom < -max(guard, 1e-300):
        raise InvalidMomentsError("negative moment denominator beyond round-off")
    if denom <= guard:
        return GeneralizedBound(base, degenerate=True)
    corr = (moments.mu4 - 3.0 * moments.mu2 ** 2) ** 2 / denom
    return GeneralizedBound(base * (1.0 + corr), degenerate=False)


def truncated_oscillator(dim: int, hbar: float = 1.0) -> tuple[Observable, Observable]:
    """Position and momentum matrices of a dim-level oscillator truncation,
    normalized so [Q, P] = i hbar away from the truncation corner."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1)
    q = np.sqrt(hbar / 2.0) * (a + a.T)
    p = 1j * np.sqrt(hbar / 2.0) * (a.T - a)
    return Observable(q, hbar=hbar), Observable(p, hbar=hbar)
