"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Inputs violate a documented precondition."""


class ZeroCapacityError(ParameterError):
    """The parameters admit no secret (the capacity is 0)."""


class SingularSystemError(ArithmeticError):
    def __init__(self, msg="singular system"):
        super().__init__(msg)


class DecodingFailure(ArithmeticError):
    """No codeword lies within the error budget of a received word."""

    def __init__(self, msg="decoding failure"):
        super().__init__(msg)


class HashRecoveryError(RuntimeError):
    def __init__(self, msg="hash recovery failure"):
        super().__init__(msg)


class DetectionAbort(RuntimeError):
    def __init__(self, msg="detection abort"):
        super().__init__(msg)


class KnowledgeViolation(RuntimeError):
    """A limited-knowledge strategy touched state outside its read set."""
