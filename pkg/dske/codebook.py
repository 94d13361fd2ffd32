"""codebook.py
Positionwise pairing of an S1 window with an S2 window.

The value at (i, j) of the S1 window travels as the label at (i, j) of the
S2 window; a duplicate-free S1 window makes the mapping a bijection.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, Tuple

from .errors import DimensionMismatch, DuplicateValues, LabelNotInWindow, ValueNotInWindow
from .sbox import Window, is_duplicate_free


@dataclass(frozen=True)
class Codebook:
    s1_window: Window
    s2_window: Window
    _forward: Dict[int, str] = field(repr=False, compare=False, default_factory=dict)
    _reverse: Dict[str, int] = field(repr=False, compare=False, default_factory=dict)

    @property
    def k(self) -> int:
        return self.s1_window.k

    def __len__(self) -> int:
        return len(self._forward)

    def entries(self) -> Iterator[Tuple[int, str]]:
        """(value, label) pairs in row-major window order."""
        for value, label in zip(self.s1_window.flat(), self.s2_window.flat()):
            yield value, label

    def value_at(self, i: int, j: int) -> int:
        return self.s1_window.at(i, j)

    def label_at(self, i: int, j: int) -> str:
        return self.s2_window.at(i, j)


def pair(s1w: Window, s2w: Window) -> Codebook:
    if s1w.k != s2w.k:
        raise DimensionMismatch(f"S1 window is {s1w.k}x{s1w.k}, S2 window is {s2w.k}x{s2w.k}")
    if not is_duplicate_free(s1w):
        raise DuplicateValues(f"S1 window at ({s1w.origin.row},{s1w.origin.col}) repeats a residue")

    forward: Dict[int, str] = {}
    reverse: Dict[str, int] = {}
    for value, label in zip(s1w.flat(), s2w.flat()):
        forward[value] = label
        reverse[label] = value
    return Codebook(s1_window=s1w, s2_window=s2w, _forward=forward, _reverse=reverse)


def encode(cb: Codebook, value: int) -> str:
    try:
        return cb._forward[value]
    except KeyError:
        raise ValueNotInWindow(value) from None


def decode(cb: Codebook, label: str) -> int:
    try:
        return cb._reverse[label]
    except KeyError:
        raise LabelNotInWindow(label) from None
