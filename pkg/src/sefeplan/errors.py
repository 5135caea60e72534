"""Exception types shared across the package."""


class SefeplanError(Exception):
    """Base class for all package errors."""


class NotBiconnected(SefeplanError):
    pass


class NotAdjacent(SefeplanError):
    pass


class Disconnected(SefeplanError):
    pass


class MalformedInstance(SefeplanError):
    pass


class SharingViolation(MalformedInstance):
    pass


class CommonNotBiconnected(SefeplanError):
    pass


class GraphDisconnected(SefeplanError):
    pass


class EmptyGroundSet(SefeplanError):
    pass


class EmptyProjection(SefeplanError):
    pass


class UnknownLeaf(SefeplanError):
    pass


class TooLarge(SefeplanError):
    pass


class UnassignedVariable(SefeplanError):
    pass


class NotRepresentable(SefeplanError):
    pass


class EmbeddingInvalid(SefeplanError):
    pass


class IncompatibleRotation(SefeplanError):
    pass


class DegenerateFace(SefeplanError):
    pass


class InstanceSyntaxError(MalformedInstance):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no
