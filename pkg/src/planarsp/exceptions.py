"""Exception and warning types raised by planarsp."""


class InvalidGridError(ValueError):
    """Grid parameters do not describe a supported square grid."""


class ShootingError(RuntimeError):
    """The radial shooting procedure could not bracket the ground state."""


class KernelMismatchError(ValueError):
    """A field and a kernel table live on different grids."""


class DegenerateFieldError(ValueError):
    """A quantity is undefined because the field has (numerically) zero mass."""


class SupercriticalMassError(ValueError):
    """Requested mass is at or above the critical mass, where no minimizer exists."""


class ResolutionError(ValueError):
    """The grid cannot resolve the requested concentrated profile."""


class CenteringError(ValueError):
    """The peak of a field is too close to the box boundary to rescale about it."""


class TruncationWarning(UserWarning):
    """A field carries non-negligible weight near the edge of the periodic box."""
