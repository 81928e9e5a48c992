"""Exception taxonomy. The CLI maps these onto exit codes (see cli.EXIT_CODES)."""


class NeukolError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NeukolError):
    """Bad config file, unknown keys, unsupported potential, aliasing, bad probes."""


class DataError(NeukolError):
    """NaN inputs, degenerate measures, invalid spectra."""


class GeometryError(NeukolError):
    """Empty surface bands, empty active domains."""


class SolverError(NeukolError):
    """CG breakdown, non-convergence, prox failure, path blow-up."""


class ResourceError(NeukolError):
    """Grid memory estimate above the configured cap."""
