"""dske package init"""

from .sbox import (
    SecretParams,
    SubBoxSelection,
    SBoxS1,
    SBoxS2,
    Window,
    validate_params,
    generate_s1,
    generate_s2,
    extract_window,
    is_duplicate_free,
    find_duplicate_free_selection,
)
from .codebook import Codebook, pair, encode, decode
from .session import (
    SessionConfig,
    SessionKey,
    SessionState,
    derive_selections,
    derive_key_bytes,
    initiator_pick_key,
    responder_receive,
    initiator_verify_confirm,
)
from .wire import WireFrame, FrameType, SessionTranscript, encode_frame, decode_frame
from .endpoints import run_initiator, run_responder
from .attack import (
    LayerState,
    CompromiseReport,
    build_attacker_view,
    enumerate_candidate_keys,
    enumerate_consistent_params,
    case_report,
)

__all__ = [
    "SecretParams",
    "SubBoxSelection",
    "SBoxS1",
    "SBoxS2",
    "Window",
    "validate_params",
    "generate_s1",
    "generate_s2",
    "extract_window",
    "is_duplicate_free",
    "find_duplicate_free_selection",
    "Codebook",
    "pair",
    "encode",
    "decode",
    "SessionConfig",
    "SessionKey",
    "SessionState",
    "derive_selections",
    "derive_key_bytes",
    "initiator_pick_key",
    "responder_receive",
    "initiator_verify_confirm",
    "WireFrame",
    "FrameType",
    "SessionTranscript",
    "encode_frame",
    "decode_frame",
    "run_initiator",
    "run_responder",
    "LayerState",
    "CompromiseReport",
    "build_attacker_view",
    "enumerate_candidate_keys",
    "enumerate_consistent_params",
    "case_report",
]
