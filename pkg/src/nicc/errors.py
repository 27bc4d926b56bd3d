"""Exception hierarchy shared across the package.

Numerical failures derive from :class:`NiccError`; malformed input files
raise :class:`SchemaError`. The CLI maps the former to exit code 1 and the
latter (together with usage errors) to exit code 2.
"""


class NiccError(Exception):
    """Base class for numerical / modeling failures."""


class EmptyDataError(NiccError):
    """No observations, or fewer observations than parameters."""


class RankDeficientError(NiccError):
    """Model matrix columns are collinear; the fit is not identified."""


class ConvergenceError(NiccError):
    """IRLS hit its iteration cap with diverging coefficients."""


class DimensionMismatchError(NiccError):
    """Fit and data disagree on shape or column layout."""


class UnconvergedFitError(NiccError):
    """A criterion was requested for a fit that did not converge."""


class SingularInformationError(NiccError):
    """Observed information is not positive definite at the pivot tolerance."""


class LabelMismatchError(NiccError):
    """Cluster labels do not align with the rows they should describe."""


class KTooLargeError(NiccError):
    """Requested more cross-validation folds than there are clusters."""


class TooFewFoldsError(NiccError):
    """A standard error needs at least two fold contributions."""


class MissingSeError(NiccError):
    """The 1-SE rule needs standard errors on the selection path."""


class InvalidConfigError(NiccError):
    """Simulation configuration violates its own constraints."""


class SchemaError(Exception):
    """CSV/config input does not match the expected schema."""
