"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes, so anything user-facing
should raise one of them rather than a bare ValueError.
"""


class PrefscanError(Exception):
    """Base class for all package errors."""


class ConfigurationError(PrefscanError):
    """Invalid configuration value (bad architecture, window, schedule...)."""


class InputError(PrefscanError):
    """Malformed call input: shape mismatch, id out of range, bad vector length."""


class FormatError(PrefscanError):
    """On-disk container does not match its header (byte counts, shapes)."""


class DataError(PrefscanError):
    """Data fails validation (NaN pixels, undersized loops)."""


class StateError(PrefscanError):
    """Operation invalid for the current session state."""


class InsufficientSupportError(DataError):
    """A local analysis found no valid neighborhood (e.g. corner + big radius)."""


class NumericalError(PrefscanError):
    """Numerical failure: non-convergence or non-finite objective.

    Carries a ``diagnostics`` dict with the last iterate / gradient norm /
    epoch so failed fits can be inspected post mortem.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class CandidatesExhausted(PrefscanError):
    """Fewer than two unmeasured candidates remain; the experiment is over.

    Not a failure: the orchestrator catches this and ends the run cleanly.
    """
