"""Exception hierarchy shared by every module."""


class DetBellError(Exception):
    """Base class for all library errors."""


class DomainMismatch(DetBellError):
    pass


class DivisionByZero(DetBellError, ZeroDivisionError):
    pass


class DivisionInNonField(DetBellError):
    pass


class InvalidDomain(DetBellError, ValueError):
    pass


class WrongCharacteristic(DetBellError):
    pass


class GlynnInCharacteristic2(WrongCharacteristic):
    pass


class BadCharacteristic(WrongCharacteristic):
    pass


class NonFieldDomain(DetBellError):
    pass


class DimensionTooLarge(DetBellError):
    pass


class DegreeTooLarge(DetBellError):
    pass


class InvalidQ(DetBellError, ValueError):
    pass


class SchemaViolation(DetBellError, ValueError):
    pass


class NotAdmissible(DetBellError, ValueError):
    pass


class NonTermination(DetBellError):
    pass


class RunAborted(DetBellError):
    pass
