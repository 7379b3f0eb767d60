"""Exception hierarchy.

``ValidationError`` covers bad input of any kind and maps to CLI exit code 1.
``TrainingError`` covers failures while fitting a model and maps to exit code 2.
"""


class FusionbenchError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(FusionbenchError, ValueError):
    pass


class MalformedRecordError(ValidationError):
    def __init__(self, item_id, message):
        self.item_id = item_id
        super().__init__(f"record {item_id!r}: {message}")


class LabelSpaceMismatch(ValidationError):
    pass


class MissingProbabilitiesError(ValidationError):
    pass


class DegenerateInputError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class StratificationError(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed file content, located by path and 1-based line number."""

    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        self.reason = message
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


class TrainingError(FusionbenchError, RuntimeError):
    pass


class DivergenceError(TrainingError):
    def __init__(self, epoch, learning_rate, loss):
        self.epoch = epoch
        self.learning_rate = learning_rate
        self.loss = loss
        super().__init__(
            f"training diverged at epoch {epoch} (learning rate {learning_rate}): loss={loss}"
        )
