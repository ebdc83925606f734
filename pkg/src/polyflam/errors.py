"""Exception types shared across the package."""


class PolyflamError(Exception):
    """Base class for all package errors."""

    code = "error"


class DomainError(PolyflamError):
    """A value violates a physical or mathematical precondition."""

    code = "domain_error"


class ParseError(PolyflamError):
    """A chemical structure could not be parsed.

    Carries ``offset`` (character offset, SMILES) or ``line`` (line number,
    PDB) when the location is known.
    """

    code = "parse_error"

    def __init__(self, message: str, offset: int | None = None, line: int | None = None):
        super().__init__(message)
        self.offset = offset
        self.line = line


class LoadError(PolyflamError):
    """A data file failed validation; message names the offending row."""

    code = "load_error"


class FitError(PolyflamError):
    """A model could not be fitted to the given data."""

    code = "fit_error"


class ConfigError(PolyflamError):
    """Invalid configuration (expert labels, grids, metric names...)."""

    code = "config_error"


class BundleError(PolyflamError):
    """A trained bundle could not be serialized or restored."""

    code = "bundle_error"
