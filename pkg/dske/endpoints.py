"""endpoints.py
Blocking initiator/responder endpoints running the DSKE handshake over TCP.

One session per connection:
    initiator -> HELLO(nonce, L) -> LABELS(labels) ; responder -> CONFIRM(reversed labels)
Either side answers a failure with an ERROR frame and closes.
"""
from __future__ import annotations

import socket
import logging
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Deque, Optional, Sequence, Tuple

from pydantic import ValidationError

from .config import DEFAULT_PORT
from .errors import (
    ConfirmMismatch,
    ConnectionClosed,
    LabelCountMismatch,
    LabelNotInWindow,
    NoDuplicateFreeWindow,
    PeerError,
    ProtocolError,
    WireError,
)
from .session import (
    Role,
    SessionConfig,
    SessionInternals,
    SessionState,
    initiator_pick_key,
    initiator_verify_confirm,
    random_nonce,
    responder_receive,
)
from .wire import ErrorCode, FrameBuffer, FrameType, SessionTranscript, WireFrame, decode_frame, encode_frame

logger = logging.getLogger(__name__)

RECV_CHUNK = 4096

Address = Tuple[str, int]


class FrameChannel:
    """Frame-level view of a connected socket. Records every frame sent or received."""

    def __init__(self, sock: socket.socket, transcript: Optional[SessionTranscript] = None) -> None:
        self.sock = sock
        self.transcript = transcript if transcript is not None else SessionTranscript()
        self._buffer = FrameBuffer()
        self._ready: Deque[WireFrame] = deque()

    def send(self, frame: WireFrame) -> None:
        self.sock.sendall(encode_frame(frame))
        self.transcript.record(frame)

    def recv(self) -> WireFrame:
        while not self._ready:
            chunk = self.sock.recv(RECV_CHUNK)
            if not chunk:
                raise ConnectionClosed("peer closed the connection")
            self._ready.extend(self._buffer.feed(chunk))
        frame = self._ready.popleft()
        self.transcript.record(frame)
        return frame

    def send_error(self, code: ErrorCode) -> None:
        # the peer may already be gone; the local failure is what gets reported
        try:
            self.send(WireFrame.error(code))
        except OSError as e:
            logger.debug("could not deliver error frame %s: %s", code.name, e)


def _expect(channel: FrameChannel, state: SessionState, frame_type: FrameType) -> WireFrame:
    try:
        frame = channel.recv()
    except WireError:
        state.fail()
        channel.send_error(ErrorCode.MALFORMED)
        raise
    if frame.type is FrameType.ERROR:
        state.fail()
        logger.warning(f"❌ peer reported error code {frame.error_code}")
        raise PeerError(frame.error_code)
    if frame.type is not frame_type:
        state.fail()
        channel.send_error(ErrorCode.UNEXPECTED_FRAME)
        raise ProtocolError(f"expected {frame_type.name}, got {frame.type.name}")
    return frame


def initiate_on(
    sock: socket.socket,
    config: SessionConfig,
    nonce_source: Optional[Callable[[], int]] = None,
    randomness=None,
    transcript: Optional[SessionTranscript] = None,
) -> bytes:
    """Run the initiator side on an already connected socket; return the key bytes."""
    channel = FrameChannel(sock, transcript)
    nonce = nonce_source() if nonce_source is not None else random_nonce()
    state = SessionState.open(Role.INITIATOR, config, nonce)

    channel.send(WireFrame.hello(nonce, config.key_len))
    labels, key = initiator_pick_key(state, randomness)
    channel.send(WireFrame.labels(labels))

    reply = _expect(channel, state, FrameType.CONFIRM)
    if not initiator_verify_confirm(state, reply.label_list()):
        channel.send_error(ErrorCode.CONFIRM_MISMATCH)
        logger.warning("❌ confirmation does not echo the sent labels")
        raise ConfirmMismatch("confirmation does not echo the sent labels")

    logger.info(f"✅ initiator session confirmed (nonce={nonce}, k={state.selections.k})")
    return key.key_bytes


def respond_on(
    sock: socket.socket,
    config: SessionConfig,
    transcript: Optional[SessionTranscript] = None,
) -> bytes:
    """Run the responder side on an already connected socket; return the key bytes.

    The key length comes from the initiator's HELLO; params and requested_k
    come from ``config``.
    """
    channel = FrameChannel(sock, transcript)
    try:
        hello = channel.recv()
    except WireError:
        channel.send_error(ErrorCode.MALFORMED)
        raise
    if hello.type is not FrameType.HELLO:
        channel.send_error(ErrorCode.UNEXPECTED_FRAME)
        raise ProtocolError(f"expected HELLO, got {hello.type.name}")

    nonce, key_len = hello.hello_fields()
    try:
        session_config = SessionConfig(params=config.params, key_len=key_len, requested_k=config.requested_k)
        state = SessionState.open(Role.RESPONDER, session_config, nonce)
    except (ValidationError, NoDuplicateFreeWindow) as e:
        channel.send_error(ErrorCode.BAD_HELLO)
        raise ProtocolError(f"cannot open session from HELLO: {e}") from e

    frame = _expect(channel, state, FrameType.LABELS)
    try:
        key, confirm = responder_receive(state, frame.label_list())
    except LabelNotInWindow:
        channel.send_error(ErrorCode.LABEL_NOT_IN_WINDOW)
        logger.warning("❌ received a label outside the session window")
        raise
    except LabelCountMismatch:
        channel.send_error(ErrorCode.MALFORMED)
        raise

    channel.send(WireFrame.confirm(confirm))
    logger.info(f"✅ responder session confirmed (nonce={nonce}, k={state.selections.k})")
    return key.key_bytes


class ResponderEndpoint:
    """Listening responder. Binds on construction so port 0 can be resolved before serving.

    ``timeout`` bounds each accepted connection; ``accept_timeout`` bounds the
    wait for a peer and defaults to waiting forever.
    """

    def __init__(
        self,
        host: str = '127.0.0.1',
        port: int = DEFAULT_PORT,
        timeout: Optional[float] = None,
        accept_timeout: Optional[float] = None,
    ) -> None:
        self.timeout = timeout
        self.accept_timeout = accept_timeout
        self._sock = socket.create_server((host, port))
        logger.info("responder listening on %s:%d", *self.address)

    @property
    def address(self) -> Address:
        host, port = self._sock.getsockname()[:2]
        return host, port

    def serve_one(self, config: SessionConfig, transcript: Optional[SessionTranscript] = None) -> bytes:
        self._sock.settimeout(self.accept_timeout)
        conn, peer = self._sock.accept()
        logger.info("accepted session from %s:%d", *peer[:2])
        with conn:
            conn.settimeout(self.timeout)
            return respond_on(conn, config, transcript)

    def close(self) -> None:
        self._sock.close()

    def __enter__(self) -> "ResponderEndpoint":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def run_responder(
    endpoint: Address,
    config: SessionConfig,
    transcript: Optional[SessionTranscript] = None,
    timeout: Optional[float] = None,
    accept_timeout: Optional[float] = None,
) -> bytes:
    with ResponderEndpoint(endpoint[0], endpoint[1], timeout=timeout, accept_timeout=accept_timeout) as responder:
        return responder.serve_one(config, transcript)


def run_initiator(
    endpoint: Address,
    config: SessionConfig,
    nonce_source: Optional[Callable[[], int]] = None,
    randomness=None,
    transcript: Optional[SessionTranscript] = None,
    timeout: Optional[float] = None,
) -> bytes:
    with socket.create_connection(endpoint, timeout=timeout) as sock:
        logger.info("connected to responder %s:%d", *endpoint)
        return initiate_on(sock, config, nonce_source, randomness, transcript)


@dataclass(frozen=True)
class HandshakeResult:
    nonce: int
    initiator_key: bytes
    responder_key: bytes
    transcript: SessionTranscript
    internals: Optional[SessionInternals] = None


def loopback_handshake(
    config: SessionConfig,
    nonce_source: Optional[Callable[[], int]] = None,
    randomness=None,
    responder_config: Optional[SessionConfig] = None,
    timeout: Optional[float] = 10.0,
) -> HandshakeResult:
    """Responder and initiator on 127.0.0.1 in two threads; transcript seen from the initiator."""
    nonce = nonce_source() if nonce_source is not None else random_nonce()
    transcript = SessionTranscript()
    with ResponderEndpoint('127.0.0.1', 0, timeout=timeout, accept_timeout=timeout) as responder:
        with ThreadPoolExecutor(max_workers=1) as pool:
            pending = pool.submit(responder.serve_one, responder_config or config)
            try:
                initiator_key = run_initiator(responder.address, config, lambda: nonce, randomness, transcript, timeout)
            finally:
                responder_outcome = pending.exception()
            if responder_outcome is not None:
                raise responder_outcome
            responder_key = pending.result()
    return HandshakeResult(nonce=nonce, initiator_key=initiator_key, responder_key=responder_key, transcript=transcript)


def simulate_session(
    config: SessionConfig,
    nonce: Optional[int] = None,
    randomness=None,
    positions: Optional[Sequence[Tuple[int, int]]] = None,
    responder_config: Optional[SessionConfig] = None,
) -> HandshakeResult:
    """Both roles in memory, every frame passed through the codec."""
    nonce = random_nonce() if nonce is None else nonce
    transcript = SessionTranscript()

    def over_wire(frame: WireFrame) -> WireFrame:
        decoded, _ = decode_frame(encode_frame(frame))
        transcript.record(decoded)
        return decoded

    initiator = SessionState.open(Role.INITIATOR, config, nonce)
    hello = over_wire(WireFrame.hello(nonce, config.key_len))

    seen_nonce, key_len = hello.hello_fields()
    peer = responder_config or config
    responder = SessionState.open(
        Role.RESPONDER,
        SessionConfig(params=peer.params, key_len=key_len, requested_k=peer.requested_k),
        seen_nonce,
    )

    labels, key = initiator_pick_key(initiator, randomness, positions)
    sent = over_wire(WireFrame.labels(labels))
    responder_key, confirm = responder_receive(responder, sent.label_list())
    reply = over_wire(WireFrame.confirm(confirm))
    if not initiator_verify_confirm(initiator, reply.label_list()):
        raise ConfirmMismatch("confirmation does not echo the sent labels")

    return HandshakeResult(
        nonce=nonce,
        initiator_key=key.key_bytes,
        responder_key=responder_key.key_bytes,
        transcript=transcript,
        internals=initiator.internals(),
    )
