"""Exception hierarchy. Everything derives from ValueError so callers that
only care about bad input can catch that."""


class R1LabError(ValueError):
    pass


class InvalidSpecError(R1LabError):
    """Minor index set malformed or out of range."""


class DimensionError(R1LabError):
    pass


class InvalidSpaceError(R1LabError):
    """Input lives in the wrong space (e.g. non-symmetric where symmetric is required)."""


class InvalidParameterError(R1LabError):
    pass


class InvalidDirectionError(R1LabError):
    """Segment direction is not rank-one."""


class InvalidRequestError(R1LabError):
    pass


class DomainError(R1LabError):
    pass


class ValidationError(R1LabError):
    pass


class InvalidInputError(R1LabError):
    pass


class NonConvexError(ValidationError):
    """Samples fail the discrete convexity check; ``index`` is the offending grid index."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index
