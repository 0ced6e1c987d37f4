"""Exception hierarchy shared by all amnorm modules."""


class AmError(Exception):
    """Base class for every error raised by amnorm."""


# graph core

class GraphError(AmError):
    pass


class InvalidGraph(GraphError):
    pass


class LabelClash(GraphError):
    pass


class AnchorClash(GraphError):
    pass


class SourceClash(GraphError):
    pass


class TokenMismatch(AmError):
    pass


# algebra

class AlgebraError(AmError):
    pass


class NoSuchSource(AlgebraError):
    pass


class TypeMismatch(AlgebraError):
    def __init__(self, message, expected=None, actual=None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class IncompatibleModifier(AlgebraError):
    pass


class ModeViolation(AlgebraError):
    pass


# trees

class TreeError(AmError):
    pass


class CycleDetected(TreeError):
    pass


class NotWellTyped(TreeError):
    def __init__(self, message, head=None, pending=()):
        super().__init__(message)
        self.head = head
        self.pending = tuple(pending)


class UnanchoredNode(TreeError):
    pass


# io

class FormatError(AmError):
    pass


class MalformedRow(FormatError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ColumnCountMismatch(MalformedRow):
    pass


class DanglingArgColumn(MalformedRow):
    pass


class UnknownEdgeLabel(MalformedRow):
    pass


class BadGraphLiteral(FormatError):
    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position
