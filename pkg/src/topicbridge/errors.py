"""Exception types shared across the package."""


class TopicBridgeError(Exception):
    """Base class for all errors raised by topicbridge."""


class ContractViolation(TopicBridgeError, ValueError):
    """Inputs have inconsistent shapes or otherwise break an operation's contract."""


class ParameterError(TopicBridgeError, ValueError):
    """A configuration or hyperparameter value is out of its valid range."""


class NumericError(TopicBridgeError, FloatingPointError):
    """NaN or Inf encountered where finite values are required."""


class CorpusError(TopicBridgeError, ValueError):
    """A corpus file could not be parsed or validated."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
