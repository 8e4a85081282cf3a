"""Exception types shared across the package."""


class GqmError(Exception):
    """Base class for all package-specific errors."""


class ZeroVectorError(GqmError, ValueError):
    """A state, spinor or form was the zero vector."""


class DimensionMismatchError(GqmError, ValueError):
    """Operands live in spaces of different dimension."""


class NonHermitianError(GqmError, ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class DegenerateLineError(GqmError, ValueError):
    """Two coincident rays do not span a projective line."""


class InvalidChartError(GqmError, ValueError):
    """Chart coordinates are invalid (pivot component vanishes)."""


class MaximalEntanglementError(GqmError, ValueError):
    """The nearest/farthest construction degenerates: the state is maximally
    entangled and callers should use the maximal-family parametrization."""


class DegenerateQuadricError(GqmError, ValueError):
    """The quadric matrix is singular; no polarity exists."""


class StepRejectionError(GqmError, RuntimeError):
    """An integration step moved the conserved energy beyond the per-step
    guard, signalling that the step size is too large."""


class InvalidMomentsError(GqmError, ValueError):
    """A central-moment set violates positivity beyond round-off."""


class ValidationError(GqmError, ValueError):
    """A file or CLI input failed validation; the message names the field."""
