"""Core value types: rays, dual covectors, Hermitian observables, projective
lines, affine chart points, and the JSON file formats shared by the CLI.

All types are immutable after construction and all operations on them are
pure functions, so everything here is safe to share across threads.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidChartError,
    NonHermitianError,
    ValidationError,
    ZeroVectorError,
)

HERMITIAN_TOL = 1e-12
RAY_EQ_TOL = 1e-12

_DEFAULT_HBAR = 1.0


def set_default_hbar(value: float) -> None:
    """Set the global hbar convention used when none is passed explicitly."""
    global _DEFAULT_HBAR
    if not value > 0:
        raise ValueError("hbar must be positive")
    _DEFAULT_HBAR = float(value)


def get_default_hbar() -> float:
    return _DEFAULT_HBAR


def _as_complex_vector(components) -> np.ndarray:
    arr = np.asarray(components, dtype=np.complex128)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D component vector, got shape {arr.shape}")
    return arr


class PureState:
    """A ray in C^(n+1), stored as a unit-norm representative.

    The constructor rescales to unit norm by a positive real factor, so the
    overall phase of the input is preserved (this matters for horizontal
    lifts, where the representative's phase is the quantity of interest).
    Equality is ray equality: two states compare equal when they agree up to
    a global complex phase.
    """

    __slots__ = ("components",)

    def __init__(self, components):
        vec = _as_complex_vector(components)
        if vec.size < 2:
            raise ValueError("a state needs at least two components")
        norm = np.linalg.norm(vec)
        if norm < 1e-300 or not np.isfinite(norm):
            raise ZeroVectorError("state components are all zero (or not finite)")
        vec = vec / norm
        vec.flags.writeable = False
        object.__setattr__(self, "components", vec)

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    @property
    def dim(self) -> int:
        return self.components.size

    def canonical(self) -> "PureState":
        """Phase-fixed representative: largest-|component| made real positive."""
        k = int(np.argmax(np.abs(self.components)))
        phase = self.components[k] / abs(self.components[k])
        return PureState(self.components / phase)

    def overlap(self, other: "PureState") -> complex:
        """Hermitian inner product <self|other> of the unit representatives."""
        _check_same_dim(self, other)
        return complex(np.vdot(self.components, other.components))

    def ray_equal(self, other: "PureState", tol: float = RAY_EQ_TOL) -> bool:
        if self.dim != other.dim:
            return False
        return abs(self.overlap(other)) >= 1.0 - tol

    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        return self.ray_equal(other)

    def __hash__(self):
        # Rays hash on dimension only; fine for the small collections used here.
        return hash(self.dim)

    def __repr__(self):
        return f"PureState({np.array2string(self.components, precision=6)})"

    @staticmethod
    def basis(dim: int, k: int) -> "PureState":
        vec = np.zeros(dim, dtype=np.complex128)
        vec[k] = 1.0
        return PureState(vec)

    @staticmethod
    def random(dim: int, rng: np.random.Generator) -> "PureState":
        """Haar (Fubini-Study uniform) random ray via a complex Gaussian."""
        z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return PureState(z)


class DualState:
    """A covector (bra), e.g. the componentwise conjugate of a ray."""

    __slots__ = ("covector",)

    def __init__(self, covector):
        vec = _as_complex_vector(covector)
        if np.linalg.norm(vec) == 0.0:
            raise ZeroVectorError("dual covector is zero")
        vec.flags.writeable = False
        object.__setattr__(self, "covector", vec)

    def __setattr__(self, name, value):
        raise AttributeError("DualState is immutable")

    @property
    def dim(self) -> int:
        return self.covector.size

    def pairing(self, state: PureState) -> complex:
        """Natural (non-conjugating) pairing covector_a psi^a."""
        if self.dim != state.dim:
            raise DimensionMismatchError(
                f"covector dim {self.dim} != state dim {state.dim}"
            )
        return complex(self.covector @ state.components)

    def conjugate_state(self) -> PureState:
        """The ket whose components are the conjugated covector entries."""
        return PureState(np.conj(self.covector))

    def __repr__(self):
        return f"DualState({np.array2string(self.covector, precision=6)})"


class Observable:
    """A Hermitian matrix together with the hbar convention in force."""

    __slots__ = ("matrix", "hbar")

    def __init__(self, matrix, hbar: float | None = None):
        mat = np.asarray(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"observable must be a square matrix, got {mat.shape}")
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL * scale:
            raise NonHermitianError("matrix is not Hermitian to 1e-12")
        mat = 0.5 * (mat + mat.conj().T)
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "hbar", float(hbar) if hbar is not None else get_default_hbar())

    def __setattr__(self, name, value):
        raise AttributeError("Observable is immutable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, state: PureState) -> float:
        if state.dim != self.dim:
            raise DimensionMismatchError(
                f"observable dim {self.dim} != state dim {state.dim}"
            )
        psi = state.components
        return float(np.real(np.vdot(psi, self.matrix @ psi)))

    def variance(self, state: PureState) -> float:
        psi = state.components
        apsi = self.matrix @ psi
        exp = float(np.real(np.vdot(psi, apsi)))
        return max(0.0, float(np.real(np.vdot(apsi, apsi))) - exp * exp)

    @staticmethod
    def random(dim: int, rng: np.random.Generator, scale: float = 1.0) -> "Observable":
        m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        return Observable(scale * 0.5 * (m + m.conj().T))

    def __repr__(self):
        return f"Observable(dim={self.dim})"


class ProjectiveLine:
    """The join of two distinct rays, stored as the antisymmetrized bivector
    L^{ab} = (xi^a eta^b - xi^b eta^a) / 2.  Component ratios depend only on
    the line, not on the generating pair."""

    __slots__ = ("bivector",)

    def __init__(self, bivector):
        biv = np.asarray(bivector, dtype=np.complex128)
        if biv.ndim != 2 or biv.shape[0] != biv.shape[1]:
            raise ValueError("bivector must be square")
        if np.max(np.abs(biv + biv.T)) > 1e-12 * max(1.0, np.max(np.abs(biv))):
            raise ValueError("bivector must be antisymmetric")
        biv = 0.5 * (biv - biv.T)
        biv.flags.writeable = False
        object.__setattr__(self, "bivector", biv)

    def __setattr__(self, name, value):
        raise AttributeError("ProjectiveLine is immutable")

    @property
    def dim(self) -> int:
        return self.bivector.shape[0]

    def membership_residual(self, state: PureState) -> float:
        """Scale-free residual of the incidence condition L^[ab psi^c] = 0."""
        if state.dim != self.dim:
            raise DimensionMismatchError("state/line dimension mismatch")
        L = self.bivector
        psi = state.components
        t = (
            np.einsum("ab,c->abc", L, psi)
            + np.einsum("bc,a->abc", L, psi)
            + np.einsum("ca,b->abc", L, psi)
        ) / 3.0
        return float(np.max(np.abs(t)) / (np.max(np.abs(L)) * np.max(np.abs(psi))))

    def contains(self, state: PureState, tol: float = 1e-10) -> bool:
        return self.membership_residual(state) < tol

    def normalized(self) -> np.ndarray:
        """Projectively normalized coefficient vector (unit norm, fixed phase)."""
        flat = self.bivector[np.triu_indices(self.dim, k=1)]
        flat = flat / np.linalg.norm(flat)
        k = int(np.argmax(np.abs(flat)))
        return flat / (flat[k] / abs(flat[k]))


class ChartPoint:
    """Real coordinates of a ray in the affine chart where one homogeneous
    component (the pivot) is gauged to 1.

    coords layout: the first n entries are the real parts of the affine
    coordinates z_1..z_n (taken in index order, skipping the pivot), the
    last n entries the imaginary parts.
    """

    __slots__ = ("pivot", "coords")

    def __init__(self, pivot: int, coords):
        arr = np.asarray(coords, dtype=np.float64)
        if arr.ndim != 1 or arr.size % 2 != 0 or arr.size == 0:
            raise ValueError("coords must be a real vector of even length 2n")
        n = arr.size // 2
        if not 0 <= pivot <= n:
            raise ValueError(f"pivot {pivot} out of range for dimension {n + 1}")
        if not np.all(np.isfinite(arr)):
            raise InvalidChartError("chart coordinates must be finite")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "pivot", int(pivot))
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ChartPoint is immutable")

    @property
    def n(self) -> int:
        """Complex dimension of the projective space."""
        return self.coords.size // 2

    @property
    def dim(self) -> int:
        return self.n + 1

    def affine(self) -> np.ndarray:
        """The n complex affine coordinates."""
        n = self.n
        return self.coords[:n] + 1j * self.coords[n:]

    def homogeneous(self) -> np.ndarray:
        """Unnormalized homogeneous representative with pivot component 1."""
        z = self.affine()
        psi = np.empty(self.dim, dtype=np.complex128)
        psi[self.pivot] = 1.0
        idx = [j for j in range(self.dim) if j != self.pivot]
        psi[idx] = z
        return psi

    def to_state(self) -> PureState:
        return PureState(self.homogeneous())

    @staticmethod
    def from_state(state: PureState, pivot: int | None = None) -> "ChartPoint":
        comps = state.components
        if pivot is None:
            pivot = int(np.argmax(np.abs(comps)))
        if abs(comps[pivot]) < 1e-14:
            raise InvalidChartError(
                f"component {pivot} vanishes; the ray is outside this chart"
            )
        z = np.delete(comps / comps[pivot], pivot)
        return ChartPoint(pivot, np.concatenate([z.real, z.imag]))

    @staticmethod
    def random(n: int, rng: np.random.Generator, radius: float = 1.0) -> "ChartPoint":
        return ChartPoint(0, radius * rng.uniform(-1.0, 1.0, size=2 * n))

    def __repr__(self):
        return f"ChartPoint(pivot={self.pivot}, coords={np.array2string(self.coords, precision=6)})"


def _check_same_dim(a: PureState, b: PureState) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")


# ---------------------------------------------------------------------------
# JSON file formats (shared by every CLI subcommand)
# ---------------------------------------------------------------------------

def _complex_to_pair(c: complex) -> list:
    return [float(np.real(c)), float(np.imag(c))]


def _pair_to_complex(pair, field: str) -> complex:
    if (not isinstance(pair, (list, tuple))) or len(pair) != 2:
        raise ValidationError(f"{field}: expected a [re, im] pair, got {pair!r}")
    try:
        return complex(float(pair[0]), float(pair[1]))
    except (TypeError, ValueError):
        raise ValidationError(f"{field}: entries must be numbers") from None


def state_to_dict(state: PureState) -> dict:
    return {
        "dim": state.dim,
        "components": [_complex_to_pair(c) for c in state.components],
    }


def state_from_dict(data: dict) -> PureState:
    if not isinstance(data, dict):
        raise ValidationError("state: expected a JSON object")
    if "components" not in data:
        raise ValidationError("state.components: missing")
    comps = data["components"]
    if not isinstance(comps, list) or len(comps) < 2:
        raise ValidationError("state.components: need a list of at least 2 entries")
    vec = [_pair_to_complex(p, f"state.components[{i}]") for i, p in enumerate(comps)]
    if "dim" in data and int(data["dim"]) != len(vec):
        raise ValidationError(
            f"state.dim: {data['dim']} does not match {len(vec)} components"
        )
    try:
        return PureState(vec)
    except ZeroVectorError:
        raise ValidationError("state.components: all zero") from None


def observable_to_dict(obs: Observable) -> dict:
    return {
        "dim": obs.dim,
        "matrix": [[_complex_to_pair(c) for c in row] for row in obs.matrix],
    }


def observable_from_dict(data: dict, hbar: float | None = None) -> Observable:
    if not isinstance(data, dict):
        raise ValidationError("observable: expected a JSON object")
    if "matrix" not in data:
        raise ValidationError("observable.matrix: missing")
    rows = data["matrix"]
    if not isinstance(rows, list) or not rows:
        raise ValidationError("observable.matrix: need a non-empty list of rows")
    dim = len(rows)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise ValidationError(f"observable.matrix[{i}]: expected {dim} entries")
        for j, pair in enumerate(row):
            mat[i, j] = _pair_to_complex(pair, f"observable.matrix[{i}][{j}]")
    if "dim" in data and int(data["dim"]) != dim:
        raise ValidationError(f"observable.dim: {data['dim']} does not match matrix size {dim}")
    try:
        return Observable(mat, hbar=hbar)
    except NonHermitianError:
        raise ValidationError("observable.matrix: not Hermitian to 1e-12") from None


def symspinor_to_dict(rank: int, coeffs: Sequence[complex]) -> dict:
    return {
        "dim": len(coeffs),
        "rank": rank,
        "components": [_complex_to_pair(c) for c in coeffs],
    }


def symspinor_from_dict(data: dict) -> tuple[int, np.ndarray]:
    if not isinstance(data, dict):
        raise ValidationError("spinor: expected a JSON object")
    if "rank" not in data:
        raise ValidationError("spinor.rank: missing")
    rank = int(data["rank"])
    state = state_from_dict({k: v for k, v in data.items() if k != "rank"})
    if state.dim != rank + 1:
        raise ValidationError(
            f"spinor.components: rank {rank} needs {rank + 1} components, got {state.dim}"
        )
    return rank, state.components


def load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"file: {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"file {path}: invalid JSON ({exc})") from None


def save_json(path: str, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_state(path: str) -> PureState:
    return state_from_dict(load_json(path))


def load_observable(path: str, hbar: float | None = None) -> Observable:
    return observable_from_dict(load_json(path), hbar=hbar)
