"""sbox.py
S1/S2 box generation, sub-box windows and the box dump text format.

S1 is the secret 6x6 grid of residues mod q built from the layer-1 secret
(p, q, n); S2 is the public 6x6 grid of two-character labels. A session uses
one k x k window of each (k in 3, 4, 5).
"""
from __future__ import annotations

import re
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np  # type: ignore
from pydantic import BaseModel, ConfigDict, Field

from .errors import BoxError, NoDuplicateFreeWindow, NonPrime, OutOfBounds, OutOfRange

logger = logging.getLogger(__name__)

GRID_SIZE = 6
WINDOW_SIZES = (3, 4, 5)
Q_LIMIT = 2 ** 31

LABEL_DIGITS = "123456789ab"
LABEL_LETTERS = "abcdef"

DUMP_HEADER = re.compile(r"^DSKE-BOX v1 q=(\d+)$")

Cells = Tuple[Tuple[int, ...], ...]
LabelCells = Tuple[Tuple[str, ...], ...]


# --- number theory helpers ---

def is_prime(n: int) -> bool:
    """Deterministic trial division; fine for n < 2**31."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def primes_up_to(limit: int) -> List[int]:
    if limit < 2:
        return []
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for d in range(2, int(limit ** 0.5) + 1):
        if sieve[d]:
            sieve[d * d::d] = False
    return [int(x) for x in np.flatnonzero(sieve)]


# --- value types ---

class SecretParams(BaseModel):
    """Layer-1 secret. Build it through validate_params()."""

    model_config = ConfigDict(frozen=True)

    p: int
    q: int
    n: int


class SubBoxSelection(BaseModel):
    """Origin and size of a k x k window."""

    model_config = ConfigDict(frozen=True)

    row: int = Field(ge=0)
    col: int = Field(ge=0)
    k: Literal[3, 4, 5]

    @property
    def span(self) -> int:
        """Number of origins per axis for this k."""
        return GRID_SIZE - self.k + 1

    @property
    def index(self) -> int:
        return self.row * self.span + self.col

    @classmethod
    def from_index(cls, index: int, k: int) -> "SubBoxSelection":
        m = GRID_SIZE - k + 1
        return cls(row=index // m, col=index % m, k=k)

    def in_bounds(self) -> bool:
        return self.row + self.k <= GRID_SIZE and self.col + self.k <= GRID_SIZE

    def contains(self, row: int, col: int) -> bool:
        return self.row <= row < self.row + self.k and self.col <= col < self.col + self.k


@dataclass(frozen=True)
class SBoxS1:
    cells: Cells
    q: int
    params: Optional[SecretParams] = None

    @property
    def grid(self) -> np.ndarray:
        arr = np.array(self.cells, dtype=np.int64)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class SBoxS2:
    cells: LabelCells


@dataclass(frozen=True)
class Window:
    values: tuple
    origin: SubBoxSelection

    @property
    def k(self) -> int:
        return self.origin.k

    def at(self, i: int, j: int):
        return self.values[i][j]

    def flat(self) -> list:
        return [v for row in self.values for v in row]


@dataclass(frozen=True)
class WindowStatistics:
    q: int
    distinct_residues: int
    duplicate_free: Dict[int, int] = field(default_factory=dict)
    totals: Dict[int, int] = field(default_factory=dict)


# --- operations ---

def validate_params(p: int, q: int, n: int) -> SecretParams:
    if not is_prime(p):
        raise NonPrime("p", p)
    if not is_prime(q):
        raise NonPrime("q", q)
    if p >= q:
        raise OutOfRange(f"p must be smaller than q (p={p}, q={q})")
    if q >= Q_LIMIT:
        raise OutOfRange("q must be below 2^31")
    if n < 1 or n >= q:
        raise OutOfRange(f"n must satisfy 1 <= n < q (n={n})")
    return SecretParams(p=p, q=q, n=n)


def generate_s1(params: SecretParams) -> SBoxS1:
    """Evaluate the six row formulas, every cell reduced to [0, q)."""
    p, q, n = params.p, params.q, params.n
    c = np.arange(GRID_SIZE, dtype=np.int64)
    grid = np.empty((GRID_SIZE, GRID_SIZE), dtype=np.int64)

    grid[0, 0] = p % q
    grid[0, 1:] = [pow(p, n + j - 1, q) for j in range(1, GRID_SIZE)]
    grid[1] = p - (c + 1) * n
    grid[2] = p + (c + 1) * n
    grid[3] = p * (c + 2) - n
    grid[4] = p + (c + 2) - n
    grid[5] = p * (c + 2) + n
    # numpy % with a positive modulus already yields least non-negative residues
    grid %= q

    cells = tuple(tuple(int(v) for v in row) for row in grid)
    return SBoxS1(cells=cells, q=q, params=params)


@lru_cache(maxsize=1)
def generate_s2() -> SBoxS2:
    cells = tuple(
        tuple(format(r + c + 1, "x") + LABEL_LETTERS[r] for c in range(GRID_SIZE))
        for r in range(GRID_SIZE)
    )
    return SBoxS2(cells=cells)


@lru_cache(maxsize=1)
def _label_positions() -> Dict[str, Tuple[int, int]]:
    s2 = generate_s2()
    return {label: (r, c) for r, row in enumerate(s2.cells) for c, label in enumerate(row)}


def s2_cell_of(label: str) -> Optional[Tuple[int, int]]:
    """Absolute S2 coordinates of a public label, or None for a non-label."""
    return _label_positions().get(label)


@lru_cache(maxsize=None)
def window_origins(k: int) -> Tuple[SubBoxSelection, ...]:
    if k not in WINDOW_SIZES:
        raise OutOfBounds(f"window size must be one of {WINDOW_SIZES}, got {k}")
    m = GRID_SIZE - k + 1
    return tuple(SubBoxSelection.from_index(i, k) for i in range(m * m))


def extract_window(box: Union[SBoxS1, SBoxS2], sel: SubBoxSelection) -> Window:
    if not sel.in_bounds():
        raise OutOfBounds(f"window ({sel.row},{sel.col}) of size {sel.k} exceeds the {GRID_SIZE}x{GRID_SIZE} grid")
    values = tuple(tuple(row[sel.col:sel.col + sel.k]) for row in box.cells[sel.row:sel.row + sel.k])
    return Window(values=values, origin=sel)


def is_duplicate_free(w: Window) -> bool:
    return np.unique(np.asarray(w.values)).size == w.k * w.k


def find_duplicate_free_selection(box: SBoxS1, k: int, start_index: int) -> SubBoxSelection:
    """First duplicate-free origin in row-major order from start_index, wrapping."""
    origins = window_origins(k)
    total = len(origins)
    if not 0 <= start_index < total:
        raise OutOfBounds(f"start index {start_index} outside [0, {total})")
    for step in range(total):
        sel = origins[(start_index + step) % total]
        if is_duplicate_free(extract_window(box, sel)):
            return sel
    raise NoDuplicateFreeWindow(k)


def duplicate_free_selections(box: SBoxS1, k: int) -> List[SubBoxSelection]:
    return [sel for sel in window_origins(k) if is_duplicate_free(extract_window(box, sel))]


def window_statistics(box: SBoxS1) -> WindowStatistics:
    stats = WindowStatistics(q=box.q, distinct_residues=int(np.unique(box.grid).size))
    for k in WINDOW_SIZES:
        stats.duplicate_free[k] = len(duplicate_free_selections(box, k))
        stats.totals[k] = len(window_origins(k))
    return stats


# --- box dump text format ---

def dump_boxes(s1: SBoxS1, s2: Optional[SBoxS2] = None) -> str:
    s2 = s2 or generate_s2()
    lines = [f"DSKE-BOX v1 q={s1.q}"]
    lines.extend(" ".join(str(v) for v in row) for row in s1.cells)
    lines.extend(" ".join(row) for row in s2.cells)
    return "\n".join(lines) + "\n"


def parse_box_dump(text: str) -> Tuple[SBoxS1, SBoxS2]:
    """Parse a dump produced by dump_boxes(); the S1 box comes back without params."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if len(lines) != 1 + 2 * GRID_SIZE:
        raise BoxError(f"box dump must have {1 + 2 * GRID_SIZE} lines, got {len(lines)}")
    match = DUMP_HEADER.match(lines[0])
    if not match:
        raise BoxError("missing 'DSKE-BOX v1 q=<q>' header")
    q = int(match.group(1))

    rows: List[Tuple[int, ...]] = []
    for ln in lines[1:1 + GRID_SIZE]:
        try:
            row = tuple(int(tok) for tok in ln.split())
        except ValueError:
            raise BoxError(f"non-integer S1 cell in line {ln!r}") from None
        if len(row) != GRID_SIZE or any(not 0 <= v < q for v in row):
            raise BoxError(f"bad S1 line {ln!r}")
        rows.append(row)

    labels: Sequence[Tuple[str, ...]] = tuple(tuple(ln.split()) for ln in lines[1 + GRID_SIZE:])
    s2 = generate_s2()
    if tuple(labels) != s2.cells:
        raise BoxError("S2 section does not match the standard S2 box")

    return SBoxS1(cells=tuple(rows), q=q), s2
