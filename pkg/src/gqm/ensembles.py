"""General states as probability distributions over the pure-state manifold.

A weighted particle ensemble carries strictly more information than its
density matrix (the first moment): linear observables factor through the
density matrix, nonlinear ones (the entanglement measure, for instance) do
not.  Liouville transport moves the particles along the Hamiltonian flow
with weights fixed; the flow preserves the symplectic volume, which is the
mechanism behind entropy constancy.  Monte Carlo ensembles sample the
unitary-invariant (Fubini-Study) measure via normalized complex Gaussians
and carry standard errors on everything they report.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .dynamics import HamiltonianFunction, transport_state
from .errors import DimensionMismatchError
from .states import ChartPoint, Observable, PureState


class ResolutionWarning(UserWarning):
    """Raised when importance sampling collapses onto too few particles."""


@dataclass(frozen=True)
class EnsembleState:
    """Weighted particles (weights normalized to one on construction).

    monte_carlo marks importance-sampled ensembles, whose derived
    quantities carry standard errors."""

    particles: tuple[tuple[PureState, float], ...]
    monte_carlo: bool = False

    def __init__(self, particles: Sequence[tuple[PureState, float]],
                 monte_carlo: bool = False):
        pts = [(p, float(w)) for p, w in particles]
        if not pts:
            raise ValueError("an ensemble needs at least one particle")
        dim = pts[0][0].dim
        for i, (p, w) in enumerate(pts):
            if w <= 0:
                raise ValueError(f"particle {i} has nonpositive weight {w}")
            if p.dim != dim:
                raise DimensionMismatchError(f"particle {i} has dim {p.dim} != {dim}")
        total = math.fsum(w for _, w in pts)
        object.__setattr__(
            self, "particles", tuple((p, w / total) for p, w in pts)
        )
        object.__setattr__(self, "monte_carlo", bool(monte_carlo))

    @property
    def dim(self) -> int:
        return self.particles[0][0].dim

    def weights(self) -> np.ndarray:
        return np.array([w for _, w in self.particles])

    def states(self) -> list[PureState]:
        return [p for p, _ in self.particles]

    def effective_sample_size(self) -> float:
        w = self.weights()
        return float(1.0 / np.sum(w * w))

    @staticmethod
    def delta(state: PureState) -> "EnsembleState":
        return EnsembleState([(state, 1.0)])

    @staticmethod
    def uniform_sample(dim: int, samples: int, rng: np.random.Generator,
                       log_density: Callable[[PureState], float] | None = None
                       ) -> "EnsembleState":
        """Importance sample against the Fubini-Study uniform measure.

        Normalized complex Gaussians are the unique unitary-invariant law;
        weights are proportional to exp(log_density) when given."""
        states = [PureState.random(dim, rng) for _ in range(samples)]
        if log_density is None:
            w = np.ones(samples)
        else:
            logw = np.array([log_density(s) for s in states])
            w = np.exp(logw - np.max(logw))
        kept = [(s, wi) for s, wi in zip(states, w) if wi > 0.0]
        ens = EnsembleState(kept, monte_carlo=True)
        if ens.effective_sample_size() < 0.01 * samples:
            warnings.warn(
                f"effective sample size {ens.effective_sample_size():.1f} "
                f"below 1% of the {samples}-sample budget",
                ResolutionWarning,
            )
        return ens


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace first moment; stderr
    holds componentwise Monte Carlo standard errors when applicable."""

    matrix: np.ndarray
    stderr: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(m))):
            raise ValueError("density matrix must be Hermitian")
        m = 0.5 * (m + m.conj().T)
        if abs(np.real(np.trace(m)) - 1.0) > 1e-10:
            raise ValueError("density matrix must have unit trace")
        if np.min(np.linalg.eigvalsh(m)) < -1e-10:
            raise ValueError("density matrix must be positive semidefinite")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, f: Observable) -> float:
        return float(np.real(np.trace(self.matrix @ f.matrix)))

    def operator_variance(self, f: Observable) -> float:
        m2 = float(np.real(np.trace(self.matrix @ f.matrix @ f.matrix)))
        return m2 - self.expectation(f) ** 2


def unconditional_expectation(rho: EnsembleState,
                              f: Callable[[PureState], float] | Observable) -> float:
    """E[F] = sum_i w_i F(x_i) for any scalar function of the ray."""
    func = f.expectation if isinstance(f, Observable) else f
    return float(math.fsum(w * func(p) for p, w in rho.particles))


def expectation_with_stderr(rho: EnsembleState,
                            f: Callable[[PureState], float] | Observable
                            ) -> tuple[float, float]:
    """Weighted mean and its ratio-estimator standard error."""
    func = f.expectation if isinstance(f, Observable) else f
    vals = np.array([func(p) for p, _ in rho.particles])
    w = rho.weights()
    mean = float(w @ vals)
    se = float(np.sqrt(np.sum((w * (vals - mean)) ** 2)))
    return mean, se


def unconditional_variance(rho: EnsembleState, f: Observable) -> float:
    """Law-of-total-variance split: the classical dispersion of the
    conditional expectations plus the mean geometric (quantum) variance,
    each quantum term entering at first power.  Equals the operator
    variance tr(rho F^2) - tr(rho F)^2 for particle ensembles."""
    from .stats import geometric_variance

    means = np.array([f.expectation(p) for p, _ in rho.particles])
    w = rho.weights()
    grand = float(w @ means)
    classical = float(w @ (means - grand) ** 2)
    quantum = float(math.fsum(
        wi * geometric_variance(f, ChartPoint.from_state(p))
        for p, wi in rho.particles
    ))
    return classical + quantum


def density_matrix(rho: EnsembleState) -> DensityMatrix:
    """First moment sum_i w_i |psi_i><psi_i| on unit representatives."""
    dim = rho.dim
    acc = np.zeros((dim, dim), dtype=np.complex128)
    projs = []
    for p, w in rho.particles:
        proj = np.outer(p.components, np.conj(p.components))
        projs.append(proj)
        acc += w * proj
    stderr = None
    if rho.monte_carlo:
        w = rho.weights()
        stderr = np.zeros((dim, dim))
        for proj, wi in zip(projs, w):
            dev = proj - acc
            stderr += (wi * np.abs(dev)) ** 2
        stderr = np.sqrt(stderr)
    return DensityMatrix(acc, stderr=stderr)


def liouville_transport(rho: EnsembleState, h: HamiltonianFunction, t: float,
                        dt: float = 1e-3) -> EnsembleState:
    """Method of characteristics for the phase-space Liouville equation:
    each particle rides the Hamiltonian flow, weights unchanged.  For a
    linear Hamiltonian this reproduces unitary conjugation of the density
    matrix; for any Hamiltonian the flow map preserves the symplectic
    volume (entropy constancy)."""
    moved = [(transport_state(h, p, t, dt), w) for p, w in rho.particles]
    return EnsembleState(moved, monte_carlo=rho.monte_carlo)


# ---------------------------------------------------------------------------
# Canonical ensembles
# ---------------------------------------------------------------------------

def gibbs_ensemble(h: Observable, beta: float) -> EnsembleState:
    """Weighted energy eigenstates with Boltzmann weights
    exp(-beta E_j)/Z; its density matrix is exp(-beta H)/Z exactly."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    evals, evecs = np.linalg.eigh(h.matrix)
    logw = -beta * (evals - evals.min())
    w = np.exp(logw)
    particles = [(PureState(evecs[:, k]), w[k]) for k in range(h.dim)]
    return EnsembleState(particles)


def gibbs_density_matrix(h: Observable, beta: float) -> DensityMatrix:
    """exp(-beta H)/Z via the eigendecomposition (exact)."""
    evals, evecs = np.linalg.eigh(h.matrix)
    w = np.exp(-beta * (evals - evals.min()))
    w = w / np.sum(w)
    return DensityMatrix((evecs * w) @ evecs.conj().T)


def maxent_ensemble(h: Observable, beta: float, samples: int, seed: int
                    ) -> EnsembleState:
    """The maximum-entropy canonical ensemble: density proportional to
    exp(-beta H(x)) against the uniform Fubini-Study measure, realized by
    importance sampling.  Its density matrix generally differs from the
    Gibbs (eigenstate-supported) one at beta > 0."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    rng = np.random.default_rng(seed)
    return EnsembleState.uniform_sample(
        h.dim, samples, rng, log_density=lambda s: -beta * h.expectation(s)
    )


def maxent_density_cp1_quadrature(h: Observable, beta: float) -> DensityMatrix:
    """One-dimensional quadrature oracle for the maximum-entropy density
    matrix on CP^1.

    In the eigenbasis the off-diagonal entries vanish by phase symmetry
    and, with u = sin^2(theta/2) uniform on [0, 1] under the round measure,
    the ground-state weight is
    int (1-u) exp(-beta H(u)) du / int exp(-beta H(u)) du
    with H(u) = E1 (1-u) + E2 u."""
    if h.dim != 2:
        raise DimensionMismatchError("the quadrature oracle is for CP^1")
    evals, evecs = np.linalg.eigh(h.matrix)
    e1, e2 = float(evals[0]), float(evals[1])

    def dens(u):
        return np.exp(-beta * (e1 * (1.0 - u) + e2 * u - e1))

    z, _ = quad(dens, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    g, _ = quad(lambda u: (1.0 - u) * dens(u), 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
    d = np.array([g / z, 1.0 - g / z])
    return DensityMatrix((evecs * d) @ evecs.conj().T)
