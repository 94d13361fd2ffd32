"""wire.py
Binary frame codec for the DSKE handshake.

Frame format:
    [magic "DSKE" (4B)] [version 0x01 (1B)] [type (1B)] [payload length (2B, big-endian)] [payload]

Frame types:
    HELLO   (0x01): 8-byte big-endian nonce + 1-byte key length L
    LABELS  (0x02): 2*L ASCII label bytes
    CONFIRM (0x03): 2*L ASCII label bytes (the received labels, reversed)
    ERROR   (0x04): 1-byte error code
"""
from __future__ import annotations

import struct
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from typing import List, Optional, Sequence, Tuple

from .errors import (
    BadMagic,
    MalformedPayload,
    PayloadTooLarge,
    Truncated,
    UnknownType,
    UnsupportedVersion,
)

logger = logging.getLogger(__name__)

MAGIC = b"DSKE"
VERSION = 0x01
HEADER = struct.Struct(">4sBBH")
HELLO_PAYLOAD = struct.Struct(">QB")
MAX_PAYLOAD = 0xFFFF
LABEL_WIDTH = 2


class FrameType(IntEnum):
    HELLO = 0x01
    LABELS = 0x02
    CONFIRM = 0x03
    ERROR = 0x04


class ErrorCode(IntEnum):
    LABEL_NOT_IN_WINDOW = 1
    CONFIRM_MISMATCH = 2
    MALFORMED = 3
    UNEXPECTED_FRAME = 4
    BAD_HELLO = 5


def _check_payload(frame_type: FrameType, payload: bytes) -> None:
    if frame_type is FrameType.HELLO:
        if len(payload) != HELLO_PAYLOAD.size:
            raise MalformedPayload(f"HELLO payload must be {HELLO_PAYLOAD.size} bytes, got {len(payload)}")
    elif frame_type in (FrameType.LABELS, FrameType.CONFIRM):
        if len(payload) % LABEL_WIDTH:
            raise MalformedPayload(f"{frame_type.name} payload length {len(payload)} is not a multiple of {LABEL_WIDTH}")
        if payload and not payload.isalnum():
            raise MalformedPayload(f"{frame_type.name} payload is not ASCII labels")
    elif frame_type is FrameType.ERROR:
        if len(payload) != 1:
            raise MalformedPayload(f"ERROR payload must be 1 byte, got {len(payload)}")


def _join_labels(labels: Sequence[str]) -> bytes:
    try:
        payload = "".join(labels).encode("ascii")
    except UnicodeEncodeError:
        raise MalformedPayload("labels must be ASCII") from None
    if any(len(label) != LABEL_WIDTH for label in labels):
        raise MalformedPayload(f"every label must be {LABEL_WIDTH} characters")
    return payload


@dataclass(frozen=True)
class WireFrame:
    type: FrameType
    payload: bytes = b""

    @classmethod
    def hello(cls, nonce: int, key_len: int) -> "WireFrame":
        try:
            return cls(FrameType.HELLO, HELLO_PAYLOAD.pack(nonce, key_len))
        except struct.error as e:
            raise MalformedPayload(f"bad HELLO fields: {e}") from None

    @classmethod
    def labels(cls, labels: Sequence[str]) -> "WireFrame":
        return cls(FrameType.LABELS, _join_labels(labels))

    @classmethod
    def confirm(cls, labels: Sequence[str]) -> "WireFrame":
        return cls(FrameType.CONFIRM, _join_labels(labels))

    @classmethod
    def error(cls, code: int) -> "WireFrame":
        return cls(FrameType.ERROR, bytes([int(code)]))

    def hello_fields(self) -> Tuple[int, int]:
        """(nonce, key_len) of a HELLO frame."""
        if self.type is not FrameType.HELLO:
            raise MalformedPayload(f"not a HELLO frame: {self.type.name}")
        return HELLO_PAYLOAD.unpack(self.payload)

    def label_list(self) -> List[str]:
        if self.type not in (FrameType.LABELS, FrameType.CONFIRM):
            raise MalformedPayload(f"not a label frame: {self.type.name}")
        text = self.payload.decode("ascii")
        return [text[i:i + LABEL_WIDTH] for i in range(0, len(text), LABEL_WIDTH)]

    @property
    def error_code(self) -> int:
        if self.type is not FrameType.ERROR:
            raise MalformedPayload(f"not an ERROR frame: {self.type.name}")
        return self.payload[0]


def encode_frame(frame: WireFrame) -> bytes:
    payload = bytes(frame.payload)
    if len(payload) > MAX_PAYLOAD:
        raise PayloadTooLarge(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    _check_payload(frame.type, payload)
    return HEADER.pack(MAGIC, VERSION, frame.type, len(payload)) + payload


def _decode_at(data, pos: int) -> Tuple[WireFrame, int]:
    """Parse one frame starting at ``pos``; return it with the offset just past it."""
    prefix = bytes(data[pos:pos + len(MAGIC)])
    if prefix != MAGIC[:len(prefix)]:
        raise BadMagic(f"bad magic {prefix!r}")
    available = len(data) - pos
    if available < HEADER.size:
        raise Truncated(HEADER.size - available)

    _, version, type_byte, length = HEADER.unpack_from(data, pos)
    if version != VERSION:
        raise UnsupportedVersion(version)
    try:
        frame_type = FrameType(type_byte)
    except ValueError:
        raise UnknownType(type_byte) from None

    end = pos + HEADER.size + length
    if len(data) < end:
        raise Truncated(end - len(data))
    payload = bytes(data[pos + HEADER.size:end])
    _check_payload(frame_type, payload)
    return WireFrame(frame_type, payload), end


def decode_frame(data: bytes) -> Tuple[WireFrame, bytes]:
    """Parse one frame from the front of ``data``; return it with the unconsumed rest."""
    data = bytes(data)
    frame, end = _decode_at(data, 0)
    return frame, data[end:]


class FrameBuffer:
    """Reassembles frames from a byte stream delivered in arbitrary chunks."""

    def __init__(self) -> None:
        self._buf = bytearray()

    @property
    def pending(self) -> int:
        return len(self._buf)

    def feed(self, data: bytes) -> List[WireFrame]:
        self._buf.extend(data)
        frames: List[WireFrame] = []
        pos = 0
        while pos < len(self._buf):
            try:
                frame, pos = _decode_at(self._buf, pos)
            except Truncated:
                break
            frames.append(frame)
        del self._buf[:pos]
        return frames


@dataclass
class SessionTranscript:
    """Frames in the order they crossed the wire: the eavesdropper's view."""

    frames: List[WireFrame] = field(default_factory=list)

    def record(self, frame: WireFrame) -> None:
        self.frames.append(frame)

    def to_bytes(self) -> bytes:
        return b"".join(encode_frame(f) for f in self.frames)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SessionTranscript":
        buf = FrameBuffer()
        frames = buf.feed(data)
        if buf.pending:
            raise Truncated()
        return cls(frames=frames)

    def first(self, frame_type: FrameType) -> Optional[WireFrame]:
        return next((f for f in self.frames if f.type is frame_type), None)

    def hello(self) -> Optional[Tuple[int, int]]:
        frame = self.first(FrameType.HELLO)
        return None if frame is None else frame.hello_fields()

    def observed_labels(self) -> List[str]:
        frame = self.first(FrameType.LABELS)
        return [] if frame is None else frame.label_list()
