import pytest
from hypothesis import HealthCheck, assume, given, settings
import hypothesis.strategies as st

from dske.codebook import decode, encode, pair
from dske.errors import DimensionMismatch, DuplicateValues, LabelNotInWindow, ValueNotInWindow
from dske.sbox import (
    SubBoxSelection,
    duplicate_free_selections,
    extract_window,
    generate_s1,
    generate_s2,
    validate_params,
    window_origins,
)

from strategies import param_triples


def test_example_mapping(example_codebook):
    assert encode(example_codebook, 17) == "3b"
    assert decode(example_codebook, "4c") == 22
    assert example_codebook.k == 3
    assert len(example_codebook) == 9


def test_entries_are_positional(example_codebook):
    entries = list(example_codebook.entries())
    assert entries[0] == (17, "3b")
    assert entries[3] == (22, "4c")
    assert entries[-1] == (9, "7d")
    assert example_codebook.value_at(1, 1) == 27
    assert example_codebook.label_at(1, 1) == "5c"


def test_unknown_value_and_label(example_codebook):
    with pytest.raises(ValueNotInWindow) as info:
        encode(example_codebook, 5)
    assert info.value.value == 5
    with pytest.raises(LabelNotInWindow) as info:
        decode(example_codebook, "1a")
    assert info.value.label == "1a"


def test_pair_rejects_size_mismatch(example_s1, s2):
    s1w = extract_window(example_s1, SubBoxSelection(row=0, col=0, k=3))
    s2w = extract_window(s2, SubBoxSelection(row=0, col=0, k=4))
    with pytest.raises(DimensionMismatch):
        pair(s1w, s2w)


def test_pair_rejects_repeated_values(example_s1, s2):
    s1w = extract_window(example_s1, SubBoxSelection(row=0, col=1, k=3))
    s2w = extract_window(s2, SubBoxSelection(row=0, col=0, k=3))
    with pytest.raises(DuplicateValues):
        pair(s1w, s2w)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(param_triples(q_min=101), st.sampled_from([3, 4, 5]), st.data())
def test_codebook_is_a_bijection(triple, k, data):
    s1 = generate_s1(validate_params(*triple))
    candidates = duplicate_free_selections(s1, k)
    assume(candidates)
    s1_sel = data.draw(st.sampled_from(candidates))
    s2_sel = data.draw(st.sampled_from(window_origins(k)))
    cb = pair(extract_window(s1, s1_sel), extract_window(generate_s2(), s2_sel))

    assert len(cb) == k * k
    for value, label in cb.entries():
        assert encode(cb, value) == label
        assert decode(cb, label) == value
