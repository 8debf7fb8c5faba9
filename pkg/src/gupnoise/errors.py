"""Exception hierarchy.

The CLI maps these onto distinct exit codes, so keep the split: bad numbers in
a parameter set are InvalidParameterError, bad *data* fed in from outside
(observed-noise files, malformed configs) are InputDataError, and evaluating a
formula outside its regime of validity is RegimeValidityError.
"""


class GupNoiseError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GupNoiseError, ValueError):
    """A physical parameter set is unusable (non-positive mass, overdamped
    oscillator where an underdamped one is required, shot noise requested at
    zero power, ...)."""


class InputDataError(GupNoiseError, ValueError):
    """External input data could not be ingested (bad header, non-numeric or
    non-positive entries, empty file, out-of-range interpolation)."""


class RegimeValidityError(GupNoiseError, ValueError):
    """A regime-limited formula was evaluated outside its regime and the
    caller did not ask for extrapolation."""


class UnboundedBoundError(GupNoiseError, ArithmeticError):
    """The perturbation vanishes at the requested frequency, so no finite
    bound exists there."""


class OracleError(GupNoiseError, RuntimeError):
    """The stochastic integrator was misconfigured or diverged."""


class RegimeWarning(UserWarning):
    """A formula is being evaluated where the underlying expansion is only
    marginally valid; results carry a machine-readable validity flag."""
