"""cli.py
Command-line entry point: genbox, handshake, attack, inspect.

Exit codes: 0 ok, 2 usage/params, 3 transport, 4 protocol, 5 search cap.
"""
from __future__ import annotations

import sys
import json
import random
import logging
import argparse
from typing import Callable, List, Optional, Sequence

from pydantic import ValidationError

from .attack import EXAMPLE_PARAMS, Case, ParamBounds, case_iii_reports, case_report
from .config import DSKEConfig
from .endpoints import loopback_handshake, run_initiator, run_responder
from .errors import DSKEError, ParameterError, SearchSpaceTooLarge, TransportError
from .sbox import (
    WINDOW_SIZES,
    SecretParams,
    dump_boxes,
    duplicate_free_selections,
    generate_s1,
    generate_s2,
    parse_box_dump,
    validate_params,
    window_statistics,
)
from .session import SessionConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRANSPORT = 3
EXIT_PROTOCOL = 4
EXIT_SEARCH_CAP = 5

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s %(message)s'


def _error(message) -> None:
    print(f"error: {message}", file=sys.stderr)


def _params(args: argparse.Namespace, settings: DSKEConfig, default=None) -> SecretParams:
    """Flags first, then DSKE_P/DSKE_Q/DSKE_N, then ``default``."""
    p = args.p if args.p is not None else settings.p
    q = args.q if args.q is not None else settings.q
    n = args.n if args.n is not None else settings.n
    if None in (p, q, n):
        if default is None:
            raise ParameterError("p, q and n are required (flags or DSKE_P/DSKE_Q/DSKE_N)")
        p, q, n = default
    return validate_params(p, q, n)


def _session_config(args: argparse.Namespace, settings: DSKEConfig) -> SessionConfig:
    return SessionConfig(params=_params(args, settings), key_len=args.key_len, requested_k=args.k)


# --- subcommands ---

def cmd_genbox(args: argparse.Namespace, settings: DSKEConfig) -> int:
    params = _params(args, settings)
    s1 = generate_s1(params)
    if args.format == 'vectors':
        vectors = {
            'params': {'p': params.p, 'q': params.q, 'n': params.n},
            's1': [list(row) for row in s1.cells],
            's2': [list(row) for row in generate_s2().cells],
            'duplicate_free': {
                str(k): [[sel.row, sel.col] for sel in duplicate_free_selections(s1, k)]
                for k in WINDOW_SIZES
            },
        }
        print(json.dumps(vectors, indent=2))
    else:
        sys.stdout.write(dump_boxes(s1))
    return EXIT_OK


def cmd_handshake(args: argparse.Namespace, settings: DSKEConfig) -> int:
    config = _session_config(args, settings)
    nonce_source: Optional[Callable[[], int]] = (lambda: args.nonce) if args.nonce is not None else None
    rng = random.Random(args.seed) if args.seed is not None else None
    endpoint = (args.addr, args.port)

    if args.self_test:
        result = loopback_handshake(config, nonce_source, rng, timeout=args.timeout)
        if result.initiator_key != result.responder_key:
            _error("loopback peers derived different keys")
            return EXIT_PROTOCOL
        key = result.initiator_key
    elif args.role == 'init':
        key = run_initiator(endpoint, config, nonce_source, rng, timeout=args.timeout)
    elif args.role == 'resp':
        key = run_responder(endpoint, config, timeout=args.timeout, accept_timeout=args.accept_timeout)
    else:
        _error("--role init|resp or --self-test is required")
        return EXIT_USAGE

    print(key.hex())
    return EXIT_OK


def cmd_attack(args: argparse.Namespace, settings: DSKEConfig) -> int:
    params = _params(args, settings, default=EXAMPLE_PARAMS)
    options = dict(
        fresh_session_demo=not args.no_fresh_session,
        params=(params.p, params.q, params.n),
        nonce=args.nonce if args.nonce is not None else 0,
        next_nonce=args.next_nonce,
        key_len=args.key_len,
        k=args.k or 3,
        seed=args.seed if args.seed is not None else 0,
        bounds=ParamBounds(args.pmax, args.qmax, args.nmax),
        cap=args.cap,
        derivation_aware=args.derivation_aware,
    )
    case = {1: Case.CASE_I, 2: Case.CASE_II, 3: Case.CASE_III}[args.case]

    if case is Case.CASE_III and args.layer is None:
        reports = case_iii_reports(**options)
    else:
        reports = [case_report(case, layer=args.layer or 1, **options)]

    sys.stdout.write("\n".join(report.to_text() for report in reports))
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace, settings: DSKEConfig) -> int:
    if args.file:
        try:
            with open(args.file, 'r', encoding='utf-8') as f:
                text = f.read()
        except (OSError, UnicodeDecodeError) as e:
            raise ParameterError(f"cannot read {args.file}: {getattr(e, 'strerror', None) or e}") from e
        s1, s2 = parse_box_dump(text)
    else:
        s1, s2 = generate_s1(_params(args, settings)), generate_s2()

    lines: List[str] = [dump_boxes(s1, s2).rstrip("\n")]
    stats = window_statistics(s1)
    for k in WINDOW_SIZES:
        lines.append(f"k={k} duplicate_free={stats.duplicate_free[k]}/{stats.totals[k]}")
    lines.append(f"distinct_residues={stats.distinct_residues}")
    print("\n".join(lines))
    return EXIT_OK


# --- parser ---

def build_parser(settings: DSKEConfig) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--p', type=int, help='layer-1 prime p (or DSKE_P)')
    common.add_argument('--q', type=int, help='layer-1 prime q (or DSKE_Q)')
    common.add_argument('--n', type=int, help='layer-1 offset n (or DSKE_N)')
    common.add_argument('--k', type=int, choices=WINDOW_SIZES, help='window size (default: derived per session)')
    common.add_argument('--key-len', type=int, default=settings.key_len, help='number of key symbols L')
    common.add_argument('--nonce', type=int, help='fixed session nonce')
    common.add_argument('--seed', type=int, help='seed for key-symbol randomness')
    common.add_argument('--addr', default=settings.addr)
    common.add_argument('--port', type=int, default=settings.port)
    common.add_argument('--timeout', type=float, default=settings.timeout)

    parser = argparse.ArgumentParser(prog='dske', description='Dynamic session key exchange with two S-boxes')
    parser.add_argument('--log-level', default=settings.log_level)
    sub = parser.add_subparsers(dest='command', required=True)

    genbox = sub.add_parser('genbox', parents=[common], help='print the S1/S2 boxes')
    genbox.add_argument('--format', choices=('text', 'vectors'), default='text')
    genbox.set_defaults(handler=cmd_genbox)

    handshake = sub.add_parser('handshake', parents=[common], help='run one key exchange')
    handshake.add_argument('--role', choices=('init', 'resp'))
    handshake.add_argument('--self-test', action='store_true', help='run both peers over loopback')
    handshake.add_argument('--accept-timeout', type=float,
                           help='seconds the responder waits for a peer (default: no limit)')
    handshake.set_defaults(handler=cmd_handshake)

    attack = sub.add_parser('attack', parents=[common], help='layered-compromise case report')
    attack.add_argument('--case', type=int, choices=(1, 2, 3), required=True)
    attack.add_argument('--layer', type=int, choices=(1, 2, 3), help='the single broken layer for case 3')
    attack.add_argument('--pmax', type=int, default=31)
    attack.add_argument('--qmax', type=int, default=31)
    attack.add_argument('--nmax', type=int, default=5)
    attack.add_argument('--next-nonce', type=int, default=1)
    attack.add_argument('--no-fresh-session', action='store_true')
    attack.add_argument('--derivation-aware', action='store_true',
                        help='attacker with layer 1 replays the nonce selection rule')
    attack.add_argument('--cap', type=int, default=settings.search_cap, help='maximum enumerated assignments')
    attack.set_defaults(handler=cmd_attack)

    inspect = sub.add_parser('inspect', parents=[common], help='dump boxes and window statistics')
    inspect.add_argument('--file', help='box dump to read instead of generating from params')
    inspect.set_defaults(handler=cmd_inspect)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = DSKEConfig()
    except ParameterError as e:
        _error(e)
        return EXIT_USAGE

    parser = build_parser(settings)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING), format=LOG_FORMAT)

    try:
        return args.handler(args, settings)
    except (ParameterError, ValidationError) as e:
        _error(e)
        return EXIT_USAGE
    except (TransportError, OSError) as e:
        _error(f"transport failure: {e}")
        return EXIT_TRANSPORT
    except SearchSpaceTooLarge as e:
        _error(e)
        return EXIT_SEARCH_CAP
    except DSKEError as e:
        _error(e)
        return EXIT_PROTOCOL


if __name__ == '__main__':
    sys.exit(main())
