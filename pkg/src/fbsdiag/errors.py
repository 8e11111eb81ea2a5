"""Domain exceptions shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP service can map failures without string matching.
"""

from __future__ import annotations


class DomainError(Exception):
    """Base for all expected failures; ``code`` is stable across releases."""

    def __init__(self, message: str, *, code: str = "domain-error") -> None:
        super().__init__(message)
        self.code = code


class UnknownNodeError(DomainError):
    """An id did not resolve to any node in the graph."""

    def __init__(self, node_id: str, *, message: str | None = None) -> None:
        super().__init__(message or f"unknown node id {node_id!r}", code="unknown-id")
        self.node_id = node_id


class DuplicateNodeError(DomainError):
    def __init__(self, node_id: str) -> None:
        super().__init__(f"duplicate node id {node_id!r}", code="duplicate-id")
        self.node_id = node_id


class UnvalidatedGraphError(DomainError):
    """Raised when an operation requires a graph that passed validation."""

    def __init__(self, message: str = "graph has not been validated") -> None:
        super().__init__(message, code="unvalidated-graph")


class ParseError(DomainError):
    """A document could not be parsed; message names the offending location."""

    def __init__(self, message: str) -> None:
        super().__init__(message, code="parse-error")


class SpecError(DomainError):
    """A model or record spec is structurally valid but semantically wrong."""


class EmbeddingError(DomainError):
    """An embedding provider failed or returned a malformed response."""

    def __init__(self, message: str, *, code: str = "embedding-error") -> None:
        super().__init__(message, code=code)


class DiagnosisError(DomainError):
    """A diagnosis query could not be answered."""


class EvalError(DomainError):
    """An evaluation run could not be completed."""
