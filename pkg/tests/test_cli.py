import json
import socket
import time
from concurrent.futures import ThreadPoolExecutor

import pytest

from dske.attack import Case, case_report
from dske.cli import main
from dske.endpoints import ResponderEndpoint
from dske.sbox import validate_params
from dske.session import SessionConfig

from oracles import s1_oracle

EXAMPLE = ["--p", "5", "--q", "29", "--n", "3"]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("DSKE_P", "DSKE_Q", "DSKE_N", "DSKE_PORT", "DSKE_KEY_LEN", "DSKE_SEARCH_CAP", "DSKE_TIMEOUT"):
        monkeypatch.delenv(name, raising=False)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_genbox_text(capsys):
    assert main(["genbox"] + EXAMPLE) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "DSKE-BOX v1 q=29"
    assert lines[1] == "5 9 16 22 23 28"
    assert lines[4] == "7 12 17 22 27 3"
    assert lines[7] == "1a 2a 3a 4a 5a 6a"


def test_genbox_vectors(capsys):
    assert main(["genbox", "--p", "7", "--q", "31", "--n", "4", "--format", "vectors"]) == 0
    vectors = json.loads(capsys.readouterr().out)
    assert vectors["params"] == {"p": 7, "q": 31, "n": 4}
    assert vectors["s1"] == s1_oracle(7, 31, 4)
    assert vectors["s2"][0][0] == "1a"
    assert vectors["duplicate_free"]["5"] == []
    assert [0, 0] in vectors["duplicate_free"]["4"]


def test_genbox_reads_params_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("DSKE_P", "5")
    monkeypatch.setenv("DSKE_Q", "29")
    monkeypatch.setenv("DSKE_N", "3")
    assert main(["genbox"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "5 9 16 22 23 28"


def test_non_prime_is_a_usage_error(capsys):
    assert main(["genbox", "--p", "4", "--q", "29", "--n", "3"]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert "error: p is not prime" in captured.err


def test_missing_params_is_a_usage_error(capsys):
    assert main(["genbox"]) == 2
    assert "error:" in capsys.readouterr().err


def test_malformed_environment_is_a_usage_error(monkeypatch):
    monkeypatch.setenv("DSKE_PORT", "not-a-port")
    assert main(["genbox"] + EXAMPLE) == 2


def test_bad_arguments_exit_two():
    assert main(["attack"]) == 2
    assert main(["nonsense"]) == 2


def test_self_test_handshake(capsys):
    assert main(["handshake", "--self-test", "--nonce", "0", "--seed", "1"] + EXAMPLE) == 0
    key = capsys.readouterr().out.strip()
    assert len(key) == 64
    int(key, 16)


def test_handshake_without_role(capsys):
    assert main(["handshake"] + EXAMPLE) == 2


def test_handshake_between_processes_roles(capsys):
    port = str(free_port())
    common = ["--addr", "127.0.0.1", "--port", port, "--timeout", "10"] + EXAMPLE
    with ThreadPoolExecutor(max_workers=1) as pool:
        responder = pool.submit(main, ["handshake", "--role", "resp"] + common)
        for _ in range(100):
            code = main(["handshake", "--role", "init", "--seed", "3"] + common)
            if code != 3:
                break
            time.sleep(0.05)
        assert code == 0
        assert responder.result() == 0
    keys = capsys.readouterr().out.split()
    assert len(keys) == 2 and keys[0] == keys[1]


def test_responder_outlives_its_session_timeout(capsys):
    port = str(free_port())
    common = ["--addr", "127.0.0.1", "--port", port] + EXAMPLE
    with ThreadPoolExecutor(max_workers=1) as pool:
        responder = pool.submit(main, ["handshake", "--role", "resp", "--timeout", "1"] + common)
        time.sleep(1.5)
        for _ in range(100):
            code = main(["handshake", "--role", "init", "--timeout", "5"] + common)
            if code != 3:
                break
            time.sleep(0.05)
        assert code == 0
        assert responder.result() == 0


def test_responder_accept_timeout(capsys):
    port = str(free_port())
    assert main(["handshake", "--role", "resp", "--port", port, "--accept-timeout", "0.2"] + EXAMPLE) == 3
    assert "error: transport failure" in capsys.readouterr().err


def test_handshake_with_wrong_secret_is_a_protocol_failure():
    right = SessionConfig(params=validate_params(5, 29, 3), key_len=8)
    with ResponderEndpoint('127.0.0.1', 0, timeout=10) as responder:
        port = str(responder.address[1])
        with ThreadPoolExecutor(max_workers=1) as pool:
            pending = pool.submit(responder.serve_one, right)
            code = main(["handshake", "--role", "init", "--port", port, "--nonce", "0", "--seed", "0",
                         "--p", "7", "--q", "31", "--n", "4"])
            assert code == 4
            assert pending.exception() is not None


def test_unreachable_responder_is_a_transport_failure(capsys):
    port = str(free_port())
    assert main(["handshake", "--role", "init", "--port", port, "--timeout", "2"] + EXAMPLE) == 3
    assert "error:" in capsys.readouterr().err


def test_attack_case_one(capsys):
    assert main(["attack", "--case", "1"]) == 0
    out = capsys.readouterr().out
    assert "current_session_unique=true\n" in out
    assert "next_session_unique_under_fresh_layers=false\n" in out


def test_attack_case_three_single_layer(capsys):
    assert main(["attack", "--case", "3", "--layer", "1"] + EXAMPLE) == 0
    out = capsys.readouterr().out
    assert out == case_report(Case.CASE_III, layer=1).to_text()
    assert "current_session_unique=false\n" in out


def test_attack_case_three_all_layers(capsys):
    assert main(["attack", "--case", "3", "--no-fresh-session"]) == 0
    blocks = capsys.readouterr().out.split("\n\n")
    assert [b.splitlines()[1] for b in blocks] == ["layers=1", "layers=2", "layers=3"]


def test_attack_case_two_with_bounds(capsys):
    assert main(["attack", "--case", "2", "--pmax", "29", "--qmax", "31", "--nmax", "5"]) == 0
    assert "case=II\nlayers=1+2\n" in capsys.readouterr().out


def test_attack_derivation_aware(capsys):
    assert main(["attack", "--case", "3", "--layer", "1", "--derivation-aware", "--no-fresh-session"]) == 0
    assert "candidate_key_count=1\n" in capsys.readouterr().out


def test_attack_search_cap(capsys):
    assert main(["attack", "--case", "1", "--cap", "10"]) == 5
    assert "exceeds cap 10" in capsys.readouterr().err


def test_inspect_params(capsys):
    assert main(["inspect"] + EXAMPLE) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "5 9 16 22 23 28"
    assert "k=3 duplicate_free=7/16" in lines
    assert lines[-1].startswith("distinct_residues=")


def test_inspect_dump_file(tmp_path, capsys):
    assert main(["genbox"] + EXAMPLE) == 0
    dump = capsys.readouterr().out
    path = tmp_path / "box.txt"
    path.write_text(dump)

    assert main(["inspect", "--file", str(path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith(dump)
    assert "k=3 duplicate_free=7/16" in out


def test_inspect_rejects_bad_dump(tmp_path):
    path = tmp_path / "box.txt"
    path.write_text("DSKE-BOX v1 q=29\n1 2 3\n")
    assert main(["inspect", "--file", str(path)]) == 4


def test_inspect_missing_file_is_a_usage_error(tmp_path, capsys):
    missing = tmp_path / "absent.txt"
    assert main(["inspect", "--file", str(missing)]) == 2
    assert f"error: cannot read {missing}" in capsys.readouterr().err
