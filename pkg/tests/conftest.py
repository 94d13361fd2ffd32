import pytest

from dske.codebook import pair
from dske.sbox import SubBoxSelection, extract_window, generate_s1, generate_s2, validate_params
from dske.session import Role, SessionConfig, SessionState, Selections


@pytest.fixture
def example_params():
    return validate_params(5, 29, 3)


@pytest.fixture
def example_s1(example_params):
    return generate_s1(example_params)


@pytest.fixture
def s2():
    return generate_s2()


@pytest.fixture
def example_codebook(example_s1, s2):
    """S1 window at (2,3) paired with S2 window at (1,1): the worked mapping example."""
    s1w = extract_window(example_s1, SubBoxSelection(row=2, col=3, k=3))
    s2w = extract_window(s2, SubBoxSelection(row=1, col=1, k=3))
    return pair(s1w, s2w)


@pytest.fixture
def example_state(example_params, example_codebook):
    """Build a session pinned to the example codebook."""

    def make(role: Role, key_len: int) -> SessionState:
        config = SessionConfig(params=example_params, key_len=key_len, requested_k=3)
        selections = Selections(
            s1_sel=example_codebook.s1_window.origin,
            s2_sel=example_codebook.s2_window.origin,
            k=3,
        )
        return SessionState(role=role, nonce=0, config=config, selections=selections, codebook=example_codebook)

    return make
