"""Exception types shared across the solver stack."""


class WenodsError(Exception):
    """Base class for all library errors."""


class NonPhysicalState(WenodsError):
    """A state with non-positive density or recovered pressure was produced.

    During time stepping this signals solver blow-up; the message carries the
    offending cell index and, when known, the simulation time.
    """


class DegenerateSpeed(WenodsError):
    """Maximum wave speed is zero, so no stable time step exists."""


class NonPositiveMultiplier(WenodsError):
    """A smoothness-indicator multiplier was not strictly positive."""


class SchemaError(WenodsError):
    """A weight file or manifest does not match the documented schema."""


class ChannelMismatch(SchemaError):
    """First/last convolution layer does not carry the required 4 channels."""


class ShapeMismatch(WenodsError):
    """Array arguments have incompatible shapes."""


class InvalidWaveData(WenodsError):
    """Shock-relation radicand is non-positive for the given state pair."""


class RejectSample(WenodsError):
    """A random draw produced a non-realizable configuration; resample."""


class UnknownConfiguration(WenodsError):
    """Riemann configuration tag without built-in relation support."""


class UnknownName(WenodsError):
    """No built-in initial condition under the requested name."""


class AlignmentError(WenodsError):
    """Fine and coarse grids are not nested, so restriction is undefined."""


class MissingModel(WenodsError):
    """A deep-smoothness scheme was requested without a loaded CNN."""
