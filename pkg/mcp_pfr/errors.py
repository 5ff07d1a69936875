"""Exception hierarchy shared by the library, the CLI and the MCP tools.

Library code raises these; the CLI turns them into exit codes, the MCP tools
turn them into ``ERROR: ...`` strings and the TCP server into ERROR frames.
"""

from __future__ import annotations


class PFRError(Exception):
    """Base class for every failure the toolkit reports on purpose."""

    exit_code = 1
    code = 0


class ValidationError(PFRError):
    """Bad parameters, shapes or field mismatches."""

    exit_code = 1
    code = 16


class FieldError(ValidationError):
    """Element outside the field, or division by zero."""

    code = 17


class DecodeError(ValidationError):
    """Answers that cannot be decoded against the plan they claim to answer."""

    code = 18


class WireError(PFRError):
    """Malformed frame. ``code`` tells the peer what was wrong."""

    BAD_MAGIC = 1
    BAD_VERSION = 2
    TRUNCATED = 3
    ELEMENT_OUT_OF_FIELD = 4
    OVERSIZED = 5
    TRAILING_BYTES = 6
    BAD_HEADER = 7

    exit_code = 1

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class TransportError(PFRError):
    """Connection refused, dropped mid-frame, timed out, or a remote ERROR frame."""

    exit_code = 2
    code = 32


class AuditFailure(PFRError):
    """A privacy audit found a counterexample."""

    exit_code = 3
    code = 48


class InternalError(PFRError):
    """An invariant that only a bug can break."""

    exit_code = 70
    code = 64
