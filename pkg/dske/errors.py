"""errors.py
Exception hierarchy for the DSKE library.

Every error raised on purpose by the package derives from :class:`DSKEError`;
the CLI maps the families below to its exit codes.
"""
from __future__ import annotations

from typing import Optional


class DSKEError(Exception):
    """Root of every DSKE failure."""


# --- layer-1 parameters ---

class ParameterError(DSKEError):
    pass


class NonPrime(ParameterError):
    def __init__(self, which: str, value: int) -> None:
        self.which = which
        self.value = value
        super().__init__(f"{which} is not prime")


class OutOfRange(ParameterError):
    pass


# --- boxes and windows ---

class BoxError(DSKEError):
    pass


class OutOfBounds(BoxError):
    pass


class NoDuplicateFreeWindow(BoxError):
    def __init__(self, k: int) -> None:
        self.k = k
        super().__init__(f"no duplicate-free {k}x{k} window in S1 box")


# --- codebook ---

class CodebookError(DSKEError):
    pass


class DimensionMismatch(CodebookError):
    pass


class DuplicateValues(CodebookError):
    pass


class ValueNotInWindow(CodebookError):
    def __init__(self, value: int) -> None:
        self.value = value
        super().__init__("value is not in the session window")


class LabelNotInWindow(CodebookError):
    def __init__(self, label: str) -> None:
        self.label = label
        super().__init__(f"label {label!r} is not in the session window")


# --- session state machine ---

class ProtocolError(DSKEError):
    pass


class InvalidPhase(ProtocolError):
    pass


class ConfirmMismatch(ProtocolError):
    pass


class LabelCountMismatch(ProtocolError):
    pass


class PeerError(ProtocolError):
    def __init__(self, code: int) -> None:
        self.code = code
        super().__init__(f"peer reported error code {code}")


# --- frame codec ---

class WireError(DSKEError):
    pass


class PayloadTooLarge(WireError):
    pass


class MalformedPayload(WireError):
    pass


class BadMagic(WireError):
    pass


class UnsupportedVersion(WireError):
    def __init__(self, version: int) -> None:
        self.version = version
        super().__init__(f"unsupported frame version {version}")


class Truncated(WireError):
    def __init__(self, needed: Optional[int] = None) -> None:
        self.needed = needed
        super().__init__("truncated frame" if needed is None else f"truncated frame, need {needed} more bytes")


class UnknownType(WireError):
    def __init__(self, type_byte: int) -> None:
        self.type_byte = type_byte
        super().__init__(f"unknown frame type 0x{type_byte:02x}")


# --- transport ---

class TransportError(DSKEError):
    pass


class ConnectionClosed(TransportError):
    pass


# --- attack analysis ---

class AttackError(DSKEError):
    pass


class MalformedTranscript(AttackError):
    pass


class BoundsRequired(AttackError):
    pass


class InsufficientKnowledge(AttackError):
    pass


class SearchSpaceTooLarge(AttackError):
    def __init__(self, assignments: int, cap: int) -> None:
        self.assignments = assignments
        self.cap = cap
        super().__init__(f"search space of {assignments} assignments exceeds cap {cap}")
