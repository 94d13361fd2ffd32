"""smoke_test.py
Run one loopback handshake with the worked example parameters and print the result.
"""
from __future__ import annotations

import random

from .sbox import dump_boxes, generate_s1, validate_params
from .endpoints import loopback_handshake
from .session import SessionConfig


def run():
    params = validate_params(5, 29, 3)
    print('S1/S2 boxes:')
    print(dump_boxes(generate_s1(params)))
    config = SessionConfig(params=params, key_len=8, requested_k=3)
    print('Running loopback handshake...')
    result = loopback_handshake(config, nonce_source=lambda: 0, randomness=random.Random(0))
    print('Labels on the wire:', ' '.join(result.transcript.observed_labels()))
    print('Initiator key:', result.initiator_key.hex())
    print('Responder key:', result.responder_key.hex())
    print('Agreement:', result.initiator_key == result.responder_key)


if __name__ == '__main__':
    run()
