"""Exception hierarchy shared by the computation modules."""


class EtpaError(Exception):
    """Base class for all toolkit errors."""


class OutOfRange(EtpaError, ValueError):
    """A wavelength falls outside a dispersion model's validity window."""


class NoRoot(EtpaError):
    """Bracketed root search found no sign change."""


class Degenerate(EtpaError):
    """A quantity is undefined for the given input (e.g. isotropic covariance)."""


class GridMismatch(EtpaError, ValueError):
    """Two biphoton states do not share a grid or pair rate."""


class EmptyInput(EtpaError, ValueError):
    """An operation needs a nonzero input total."""


class ZeroBaseline(EtpaError):
    """HOM baseline is zero, so the visibility is undefined."""


class NoDip(EtpaError):
    """Interferogram has no dip to measure."""


class NegativeCorrected(EtpaError, ValueError):
    """A dark-count corrected rate is not positive."""


class EmptyBackground(EtpaError, ValueError):
    """Noise estimation was asked to use an empty background region."""


class ConfigError(EtpaError, ValueError):
    """Invalid run configuration. ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
