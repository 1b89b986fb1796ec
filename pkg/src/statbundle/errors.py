"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by statbundle."""


class FrameMismatchError(GeometryError):
    """Tensors from different frames, or incompatible slot extents, were combined."""


class MetricDegenerateError(GeometryError):
    """A metric failed its positive-definiteness (Cholesky) check."""


class DomainError(GeometryError):
    """A chart point lies outside the declared domain box."""


class StructureError(GeometryError):
    """The providers do not define a valid statistical structure."""


class CollinearError(GeometryError):
    """Two vectors meant to span a plane are (numerically) collinear."""


class ClassificationError(GeometryError):
    """A specialised formula was requested for a structure that does not qualify."""


class NormalizationError(GeometryError):
    """Vectors handed to a sectional-curvature routine are not orthonormal."""


class SlotConditionError(GeometryError):
    """A second-fundamental-form slot violates its perpendicularity condition."""


class ConfigError(GeometryError):
    """Invalid run configuration, grid, or gallery parameters."""
