"""attack.py
Layered-compromise analysis of recorded DSKE sessions.

Security is measured as the number of distinct session keys an eavesdropper
cannot rule out given which layers leaked:
    layer 1: the long-term secret (p, q, n)
    layer 2: the session's S1 window (contents and origin)
    layer 3: the session's S2 window origin
Observed labels always pin absolute S2 cells, since the 36 S2 labels are distinct.
"""
from __future__ import annotations

import random
import struct
import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator, List, NamedTuple, Optional, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .config import DEFAULT_SEARCH_CAP
from .endpoints import simulate_session
from .errors import (
    BoundsRequired,
    InsufficientKnowledge,
    MalformedTranscript,
    SearchSpaceTooLarge,
    WireError,
)
from .sbox import (
    SBoxS2,
    SecretParams,
    SubBoxSelection,
    Window,
    duplicate_free_selections,
    extract_window,
    generate_s1,
    generate_s2,
    primes_up_to,
    s2_cell_of,
    validate_params,
    window_origins,
)
from .session import SessionConfig, SessionInternals, derive_selections
from .wire import SessionTranscript

logger = logging.getLogger(__name__)

EXAMPLE_PARAMS = (5, 29, 3)


class Case(str, Enum):
    CASE_I = "I"
    CASE_II = "II"
    CASE_III = "III"


class ParamBounds(NamedTuple):
    p_max: int
    q_max: int
    n_max: int


DEFAULT_BOUNDS = ParamBounds(31, 31, 5)


class LayerState(BaseModel):
    model_config = ConfigDict(frozen=True)

    layer1_known: bool = False
    layer2_known: bool = False
    layer3_known: bool = False

    @classmethod
    def of(cls, *layers: int) -> "LayerState":
        return cls(**{f"layer{i}_known": True for i in layers})

    def known(self) -> Tuple[int, ...]:
        flags = (self.layer1_known, self.layer2_known, self.layer3_known)
        return tuple(i + 1 for i, flag in enumerate(flags) if flag)

    def describe(self) -> str:
        return "+".join(str(i) for i in self.known()) or "none"


CASE_LAYERS = {
    Case.CASE_I: LayerState.of(2, 3),
    Case.CASE_II: LayerState.of(1, 2),
}


@dataclass(frozen=True)
class AttackerKnowledge:
    """Public transcript data plus whatever the flagged layers reveal."""

    layers: LayerState
    transcript: SessionTranscript
    k: int
    nonce: int
    labels: Tuple[str, ...]
    s2: SBoxS2
    params: Optional[SecretParams] = None
    s1_window: Optional[Window] = None
    s2_origin: Optional[SubBoxSelection] = None

    @property
    def observed_cells(self) -> List[Tuple[int, int]]:
        return [s2_cell_of(label) for label in self.labels]


class CompromiseReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    case: Case
    layers: LayerState
    k: int
    nonce: int
    candidate_key_count: int = Field(ge=0)
    current_session_unique: bool
    next_nonce: Optional[int] = None
    next_session_candidate_count: Optional[int] = None
    next_session_unique_under_fresh_layers: Optional[bool] = None

    @model_validator(mode="after")
    def _unique_matches_count(self) -> "CompromiseReport":
        if self.current_session_unique != (self.candidate_key_count == 1):
            raise ValueError("current_session_unique must equal candidate_key_count == 1")
        return self

    def to_text(self) -> str:
        def fmt(value) -> str:
            if value is None:
                return "none"
            if isinstance(value, bool):
                return "true" if value else "false"
            return str(value)

        fields = [
            ("case", self.case.value),
            ("layers", self.layers.describe()),
            ("k", self.k),
            ("nonce", self.nonce),
            ("candidate_key_count", self.candidate_key_count),
            ("current_session_unique", self.current_session_unique),
            ("next_nonce", self.next_nonce),
            ("next_session_candidate_count", self.next_session_candidate_count),
            ("next_session_unique_under_fresh_layers", self.next_session_unique_under_fresh_layers),
        ]
        return "".join(f"{key}={fmt(value)}\n" for key, value in fields)


# --- attacker view ---

def build_attacker_view(
    transcript: SessionTranscript,
    layers: LayerState,
    ground_truth: Optional[SessionInternals] = None,
    k: Optional[int] = None,
) -> AttackerKnowledge:
    try:
        transcript = SessionTranscript.from_bytes(transcript.to_bytes())
        hello = transcript.hello()
        labels = transcript.observed_labels()
    except (WireError, UnicodeDecodeError) as e:
        raise MalformedTranscript(f"transcript does not decode: {e}") from e
    if hello is None or not labels:
        raise MalformedTranscript("transcript lacks a HELLO or LABELS frame")
    nonce, key_len = hello
    if len(labels) != key_len:
        raise MalformedTranscript(f"HELLO announces {key_len} labels, LABELS carries {len(labels)}")
    unknown = [label for label in labels if s2_cell_of(label) is None]
    if unknown:
        raise MalformedTranscript(f"not S2 labels: {unknown}")

    if ground_truth is None:
        if layers.known():
            raise InsufficientKnowledge("ground truth is required to reveal compromised layers")
        if k is None:
            raise InsufficientKnowledge("window size k must be given without ground truth")
    else:
        k = ground_truth.k

    return AttackerKnowledge(
        layers=layers,
        transcript=transcript,
        k=k,
        nonce=nonce,
        labels=tuple(labels),
        s2=generate_s2(),
        params=ground_truth.params if layers.layer1_known else None,
        s1_window=ground_truth.s1_window if layers.layer2_known else None,
        s2_origin=ground_truth.s2_sel if layers.layer3_known else None,
    )


# --- enumeration ---

def _params_in_bounds(bounds: ParamBounds) -> Iterator[SecretParams]:
    primes = primes_up_to(bounds.q_max)
    for q in primes:
        for p in primes:
            if p >= q or p > bounds.p_max:
                break
            for n in range(1, min(bounds.n_max, q - 1) + 1):
                yield SecretParams(p=p, q=q, n=n)


def _count_params(bounds: ParamBounds) -> int:
    return sum(1 for _ in _params_in_bounds(bounds))


def _s2_candidates(knowledge: AttackerKnowledge) -> List[SubBoxSelection]:
    cells = knowledge.observed_cells
    if knowledge.s2_origin is not None:
        origins = [knowledge.s2_origin]
    else:
        origins = list(window_origins(knowledge.k))
    return [sel for sel in origins if all(sel.contains(r, c) for r, c in cells)]


@lru_cache(maxsize=4096)
def _window_values(params: SecretParams, k: int) -> Tuple[tuple, ...]:
    s1 = generate_s1(params)
    return tuple(extract_window(s1, sel).values for sel in duplicate_free_selections(s1, k))


def _check_cap(assignments: int, cap: int) -> None:
    if assignments > cap:
        raise SearchSpaceTooLarge(assignments, cap)


def _derived_codebook(knowledge: AttackerKnowledge) -> Tuple[tuple, SubBoxSelection]:
    selections = derive_selections(knowledge.params, knowledge.nonce, requested_k=knowledge.k)
    s1 = generate_s1(knowledge.params)
    return extract_window(s1, selections.s1_sel).values, selections.s2_sel


def enumerate_candidate_keys(
    knowledge: AttackerKnowledge,
    param_bounds: Optional[ParamBounds] = None,
    cap: int = DEFAULT_SEARCH_CAP,
    derivation_aware: bool = False,
) -> Set[bytes]:
    """Every session key consistent with the attacker's knowledge.

    Unknown layers range over all their possible values: S1 windows over the
    duplicate-free windows of every candidate grid, S2 origins over the
    windows that contain every observed label cell. With ``derivation_aware``
    an attacker holding layer 1 also replays the nonce-based selection rule.
    """
    k = knowledge.k
    s2_origins = _s2_candidates(knowledge)
    per_grid = len(window_origins(k))

    if derivation_aware and knowledge.params is not None:
        values, s2_sel = _derived_codebook(knowledge)
        s1_windows = {values}
        if knowledge.s1_window is not None:
            s1_windows &= {knowledge.s1_window.values}
        s2_origins = [sel for sel in s2_origins if sel == s2_sel]
    elif knowledge.s1_window is not None:
        s1_windows = {knowledge.s1_window.values}
    elif knowledge.params is not None:
        _check_cap(per_grid * len(s2_origins), cap)
        s1_windows = set(_window_values(knowledge.params, k))
    else:
        if param_bounds is None:
            raise BoundsRequired("layer 1 unknown: parameter bounds are required")
        bounds = ParamBounds(*param_bounds)
        _check_cap(_count_params(bounds) * per_grid * len(s2_origins), cap)
        s1_windows = set()
        for params in _params_in_bounds(bounds):
            s1_windows.update(_window_values(params, k))

    _check_cap(len(s1_windows) * len(s2_origins), cap)

    cells = knowledge.observed_cells
    packer = struct.Struct(f">{len(cells)}I")
    keys: Set[bytes] = set()
    for values in s1_windows:
        for origin in s2_origins:
            residues = [values[r - origin.row][c - origin.col] for r, c in cells]
            keys.add(packer.pack(*residues))

    logger.debug(
        "layers=%s: %d S1 windows x %d S2 origins -> %d keys",
        knowledge.layers.describe(), len(s1_windows), len(s2_origins), len(keys),
    )
    return keys


def enumerate_consistent_params(
    knowledge: AttackerKnowledge,
    bounds: Optional[ParamBounds],
    cap: int = DEFAULT_SEARCH_CAP,
) -> List[SecretParams]:
    """All (p, q, n) within bounds whose S1 grid holds the known window at its origin."""
    if not knowledge.layers.layer2_known or knowledge.s1_window is None:
        raise InsufficientKnowledge("layer 2 (the S1 window) must be known")
    if bounds is None:
        raise BoundsRequired("parameter bounds are required")
    bounds = ParamBounds(*bounds)
    _check_cap(_count_params(bounds), cap)

    window = knowledge.s1_window
    return [
        params for params in _params_in_bounds(bounds)
        if extract_window(generate_s1(params), window.origin).values == window.values
    ]


# --- scripted case reports ---

def _stale_layers(layers: LayerState, old: SessionInternals, new: SessionInternals) -> LayerState:
    # layer 1 survives a session; leaked selections only while they repeat
    return LayerState(
        layer1_known=layers.layer1_known,
        layer2_known=layers.layer2_known and new.s1_sel == old.s1_sel,
        layer3_known=layers.layer3_known and new.s2_sel == old.s2_sel,
    )


def case_layers(case: Case, layer: int = 1) -> LayerState:
    if case is Case.CASE_III:
        if layer not in (1, 2, 3):
            raise ValueError(f"case III takes a single layer 1, 2 or 3, got {layer}")
        return LayerState.of(layer)
    return CASE_LAYERS[case]


def case_report(
    case: Case,
    fresh_session_demo: bool = True,
    layer: int = 1,
    params: Tuple[int, int, int] = EXAMPLE_PARAMS,
    nonce: int = 0,
    next_nonce: int = 1,
    key_len: int = 8,
    k: int = 3,
    seed: int = 0,
    bounds: ParamBounds = DEFAULT_BOUNDS,
    cap: int = DEFAULT_SEARCH_CAP,
    derivation_aware: bool = False,
) -> CompromiseReport:
    """Run a scripted session, leak the case's layers, and count candidate keys."""
    case = Case(case)
    layers = case_layers(case, layer)
    config = SessionConfig(params=validate_params(*params), key_len=key_len, requested_k=k)
    rng = random.Random(seed)

    session = simulate_session(config, nonce=nonce, randomness=rng)
    knowledge = build_attacker_view(session.transcript, layers, session.internals)
    count = len(enumerate_candidate_keys(knowledge, bounds, cap, derivation_aware))

    next_count: Optional[int] = None
    if fresh_session_demo:
        follow_up = simulate_session(config, nonce=next_nonce, randomness=rng)
        stale = _stale_layers(layers, session.internals, follow_up.internals)
        stale_knowledge = build_attacker_view(follow_up.transcript, stale, follow_up.internals)
        next_count = len(enumerate_candidate_keys(stale_knowledge, bounds, cap, derivation_aware))

    report = CompromiseReport(
        case=case,
        layers=layers,
        k=knowledge.k,
        nonce=nonce,
        candidate_key_count=count,
        current_session_unique=count == 1,
        next_nonce=next_nonce if fresh_session_demo else None,
        next_session_candidate_count=next_count,
        next_session_unique_under_fresh_layers=None if next_count is None else next_count == 1,
    )
    logger.info(f"case {case.value} layers={layers.describe()}: {count} candidate keys")
    return report


def case_iii_reports(**kwargs) -> List[CompromiseReport]:
    return [case_report(Case.CASE_III, layer=layer, **kwargs) for layer in (1, 2, 3)]
