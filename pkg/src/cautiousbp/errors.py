"""Exception hierarchy shared across the package."""


class CautiousBPError(Exception):
    """Base class for all errors raised by this package."""


class StructuralError(CautiousBPError):
    """A table operation or build step was invoked with incompatible shapes,
    unknown variables, or otherwise malformed structure."""


class InconsistencyError(CautiousBPError):
    """Positive mass divided by zero; signals a corrupted propagation state,
    never a legal intermediate result."""


class ModelError(CautiousBPError):
    """A network or evidence document failed to parse or validate."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class CapacityError(CautiousBPError):
    """The requested computation exceeds a configured size cap."""


class UnknownVariableError(CautiousBPError):
    """A finding or query referenced a variable the model does not declare."""


class UnknownFindingError(CautiousBPError):
    """An operation referenced a finding id that is not present."""


class DuplicateFindingError(CautiousBPError):
    """A finding id was reused within one state."""


class ImpossibleEvidenceError(CautiousBPError):
    """A readout that must normalize was requested while P(e) = 0."""


class ImpossibleHypothesisError(CautiousBPError):
    """Conditioning was requested on a hypothesis with zero prior mass."""


class NotAccessibleError(CautiousBPError):
    """The requested evidence subset is not in the accessible family."""


class PartitionError(CautiousBPError):
    """The two given finding sets do not partition the entered evidence."""


class UndefinedPosteriorError(CautiousBPError):
    """Bayes inversion was requested against an event of zero probability."""
