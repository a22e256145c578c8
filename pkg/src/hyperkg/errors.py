"""Exception hierarchy shared by every module."""


class HyperKGError(Exception):
    """Base class for data errors raised by the engine."""


class NodeNotFoundError(HyperKGError, KeyError):
    def __init__(self, label):
        super().__init__(label)
        self.label = label

    def __str__(self):
        return f"unknown node: {self.label!r}"


class EventError(HyperKGError, ValueError):
    """An extraction event failed validation."""

    def __init__(self, reason, line=None):
        self.reason = reason
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class IntegrityError(HyperKGError):
    """The graph violates a structural invariant (e.g. missing provenance)."""


class ContractError(HyperKGError, ValueError):
    """A caller-supplied argument breaks an operation's precondition."""


class SimilarityUndefinedError(HyperKGError, ValueError):
    pass


class InsufficientDataError(HyperKGError, ValueError):
    pass


class EmptyGraphError(HyperKGError, ValueError):
    pass


class UnreachableError(HyperKGError):
    def __init__(self, source, target):
        super().__init__(f"no path between {source!r} and {target!r}")
        self.source = source
        self.target = target


class ProviderError(HyperKGError):
    """The embedding or extraction provider failed or answered off-schema."""
