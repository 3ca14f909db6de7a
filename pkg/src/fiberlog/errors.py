"""Exception hierarchy shared by every fiberlog module."""


class FiberlogError(Exception):
    """Base class for all engine errors."""


class MalformedDomain(FiberlogError, ValueError):
    pass


class MalformedTuple(FiberlogError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParseError(FiberlogError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyLattice(FiberlogError):
    pass


class ConflictingTyping(FiberlogError):
    pass


class MetaFrozen(FiberlogError):
    """Raised on any attempt to change the meta-layer while a session is active."""


class NotAnAncestor(FiberlogError, ValueError):
    pass


class NoParent(FiberlogError, ValueError):
    pass


class UnknownConcept(FiberlogError):
    pass


class DuplicateRule(FiberlogError):
    pass


class InvalidSpec(FiberlogError, ValueError):
    pass
