"""session.py
Per-session DSKE state machine.

Both peers derive the session's S1/S2 windows (layers 2 and 3) from the
shared layer-1 secret and the public nonce, so no selection data is sent.
The initiator transfers L residues as S2 labels; the responder decodes them
and echoes the labels reversed as confirmation.
"""
from __future__ import annotations

import struct
import logging
import secrets
from dataclasses import dataclass
from enum import Enum
from typing import List, Literal, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from .codebook import Codebook, decode, pair
from .errors import InvalidPhase, LabelCountMismatch, LabelNotInWindow, NoDuplicateFreeWindow, OutOfBounds, OutOfRange
from .sbox import (
    GRID_SIZE,
    SBoxS1,
    SecretParams,
    SubBoxSelection,
    Window,
    extract_window,
    find_duplicate_free_selection,
    generate_s1,
    generate_s2,
)

logger = logging.getLogger(__name__)

NONCE_LIMIT = 2 ** 64
MAX_KEY_LEN = 64


class Role(str, Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"


class Phase(str, Enum):
    HELLO = "hello"
    KEY_SENT = "key_sent"
    CONFIRMED = "confirmed"
    FAILED = "failed"


# Forward-only transitions; any phase may fail.
_TRANSITIONS = {
    Phase.HELLO: {Phase.KEY_SENT, Phase.CONFIRMED, Phase.FAILED},
    Phase.KEY_SENT: {Phase.CONFIRMED, Phase.FAILED},
    Phase.CONFIRMED: {Phase.FAILED},
    Phase.FAILED: set(),
}


class SessionConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    params: SecretParams
    key_len: int = Field(default=8, ge=1, le=MAX_KEY_LEN)
    requested_k: Optional[Literal[3, 4, 5]] = None


class Selections(NamedTuple):
    s1_sel: SubBoxSelection
    s2_sel: SubBoxSelection
    k: int


@dataclass(frozen=True)
class SessionKey:
    residues: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.residues)

    @property
    def key_bytes(self) -> bytes:
        return derive_key_bytes(self)


@dataclass(frozen=True)
class SessionInternals:
    """Snapshot of the secret per-session material, used as attack ground truth."""

    params: SecretParams
    nonce: int
    s1_sel: SubBoxSelection
    s2_sel: SubBoxSelection
    k: int
    s1_window: Window
    codebook: Codebook


def random_nonce() -> int:
    return secrets.randbits(64)


def derive_selections(
    params: SecretParams,
    nonce: int,
    requested_k: Optional[int] = None,
    s1: Optional[SBoxS1] = None,
) -> Selections:
    """Deterministic layer-2/layer-3 selection from (params, nonce).

    Falls back to smaller k when no duplicate-free window exists at the
    requested size.
    """
    if not 0 <= nonce < NONCE_LIMIT:
        raise OutOfRange("nonce must be a 64-bit unsigned integer")
    p, q, n = params.p, params.q, params.n
    s1 = s1 or generate_s1(params)

    t = pow(p, (nonce % (q - 1)) + n, q)
    k = requested_k if requested_k is not None else 3 + t % 3

    for size in range(k, 2, -1):
        m = GRID_SIZE - size + 1
        try:
            s1_sel = find_duplicate_free_selection(s1, size, t % (m * m))
        except NoDuplicateFreeWindow:
            logger.debug("no duplicate-free %dx%d window, falling back", size, size)
            continue
        s2_sel = SubBoxSelection.from_index((t + n) % (m * m), size)
        return Selections(s1_sel=s1_sel, s2_sel=s2_sel, k=size)

    raise NoDuplicateFreeWindow(3)


def derive_key_bytes(key: SessionKey) -> bytes:
    """Each residue as a 4-byte big-endian unsigned integer."""
    return struct.pack(f">{len(key.residues)}I", *key.residues)


@dataclass
class SessionState:
    """One peer's view of one session. Owned by a single task."""

    role: Role
    nonce: int
    config: SessionConfig
    selections: Selections
    codebook: Codebook
    phase: Phase = Phase.HELLO
    sent_labels: Tuple[str, ...] = ()
    key: Optional[SessionKey] = None

    @classmethod
    def open(cls, role: Role, config: SessionConfig, nonce: int) -> "SessionState":
        s1 = generate_s1(config.params)
        selections = derive_selections(config.params, nonce, config.requested_k, s1=s1)
        codebook = pair(extract_window(s1, selections.s1_sel), extract_window(generate_s2(), selections.s2_sel))
        logger.debug(
            "%s session nonce=%d k=%d s1=(%d,%d) s2=(%d,%d)",
            role.value, nonce, selections.k,
            selections.s1_sel.row, selections.s1_sel.col,
            selections.s2_sel.row, selections.s2_sel.col,
        )
        return cls(role=role, nonce=nonce, config=config, selections=selections, codebook=codebook)

    @property
    def key_len(self) -> int:
        return self.config.key_len

    def advance(self, phase: Phase) -> None:
        if phase not in _TRANSITIONS[self.phase]:
            raise InvalidPhase(f"cannot move from {self.phase.value} to {phase.value}")
        self.phase = phase

    def fail(self) -> None:
        if self.phase is not Phase.FAILED:
            self.advance(Phase.FAILED)

    def internals(self) -> SessionInternals:
        return SessionInternals(
            params=self.config.params,
            nonce=self.nonce,
            s1_sel=self.selections.s1_sel,
            s2_sel=self.selections.s2_sel,
            k=self.selections.k,
            s1_window=self.codebook.s1_window,
            codebook=self.codebook,
        )

    def _require(self, role: Role, phase: Phase) -> None:
        if self.role is not role:
            raise InvalidPhase(f"operation not available to the {self.role.value}")
        if self.phase is not phase:
            raise InvalidPhase(f"expected phase {phase.value}, session is {self.phase.value}")


def initiator_pick_key(
    state: SessionState,
    randomness=None,
    positions: Optional[Sequence[Tuple[int, int]]] = None,
) -> Tuple[List[str], SessionKey]:
    """Draw L window cells with replacement and return their labels and residues.

    ``randomness`` needs a ``randrange`` method (random.Random, SystemRandom);
    ``positions`` pins the drawn cells instead.
    """
    state._require(Role.INITIATOR, Phase.HELLO)
    cb = state.codebook
    k = cb.k

    if positions is None:
        rng = randomness or secrets.SystemRandom()
        positions = [divmod(rng.randrange(k * k), k) for _ in range(state.key_len)]
    elif len(positions) != state.key_len:
        raise ValueError(f"expected {state.key_len} positions, got {len(positions)}")

    labels: List[str] = []
    residues: List[int] = []
    for i, j in positions:
        if not (0 <= i < k and 0 <= j < k):
            raise OutOfBounds(f"position ({i},{j}) outside the {k}x{k} window")
        labels.append(cb.label_at(i, j))
        residues.append(cb.value_at(i, j))

    key = SessionKey(residues=tuple(residues))
    state.sent_labels = tuple(labels)
    state.key = key
    state.advance(Phase.KEY_SENT)
    return labels, key


def responder_receive(state: SessionState, labels: Sequence[str]) -> Tuple[SessionKey, List[str]]:
    state._require(Role.RESPONDER, Phase.HELLO)
    if len(labels) != state.key_len:
        state.fail()
        raise LabelCountMismatch(f"announced {state.key_len} labels, received {len(labels)}")
    try:
        residues = tuple(decode(state.codebook, label) for label in labels)
    except LabelNotInWindow:
        state.fail()
        raise

    key = SessionKey(residues=residues)
    state.key = key
    state.advance(Phase.CONFIRMED)
    return key, list(reversed(labels))


def initiator_verify_confirm(state: SessionState, confirm: Sequence[str]) -> bool:
    state._require(Role.INITIATOR, Phase.KEY_SENT)
    ok = tuple(confirm) == tuple(reversed(state.sent_labels))
    state.advance(Phase.CONFIRMED if ok else Phase.FAILED)
    return ok
