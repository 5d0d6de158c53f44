"""Exception hierarchy for toda_spectra.

Every numerical failure mode raised by the library derives from
:class:`TodaSpectraError`, so callers (and the CLI) can distinguish
"the computation told us something" from programming errors.
"""


class TodaSpectraError(Exception):
    """Base class for all library-specific failures."""


class DomainError(TodaSpectraError, ValueError):
    """Invalid arguments: bad order N, mismatched dimensions, k out of range."""


class NearPoleError(TodaSpectraError):
    """A shifted spectral polynomial t(lam + n*i*hbar*s) is numerically zero.

    Attributes
    ----------
    shift_index : int
        The offending shift n in the determinant recursion.
    """

    def __init__(self, message, shift_index=None):
        super().__init__(message)
        self.shift_index = shift_index


class RemovableSingularityError(TodaSpectraError):
    """Evaluation point sits on the pole lattice tau_k - s*n*i*hbar (n >= 1).

    The limit of the Q-function is finite there, but it is not evaluated;
    offset the argument by more than tol_abs and retry.
    """


class NotConvergedError(TodaSpectraError):
    """Truncation exhausted before reaching the requested tolerance."""

    def __init__(self, message, suggestion=None):
        super().__init__(message)
        self.suggestion = suggestion


class MissedRootsError(TodaSpectraError):
    """Winding count on the search rectangle differs from the expected N."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class DegenerateExponentsError(TodaSpectraError):
    """Two Floquet exponents collide; downstream Vandermonde would be singular."""


class MultiplierBlowupError(TodaSpectraError):
    """Q_- vanishes at a Wronskian zero; the multiplier zeta diverges."""


class DegenerateMonodromyError(TodaSpectraError):
    """Monodromy eigenvalues too close; connection matrix is not defined."""


class ResonantDenominatorError(TodaSpectraError):
    """sin(pi * sigma . alpha) vanishes for some positive root alpha."""


class RootSearchError(TodaSpectraError):
    """Newton refinement failed to converge.

    Attributes
    ----------
    trajectory : list
        Iterates visited before giving up (present for spectral refinement).
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory if trajectory is not None else []


class OracleError(TodaSpectraError):
    """Brute-force solver failure: box too small, overflow guard, pollution."""


class ConfigError(TodaSpectraError, ValueError):
    """Invalid job configuration (CLI layer)."""
