"""Private subset selection via semiprime commitments with digit-sum tags.

For each object in a universe 1..U the committer publishes ``(i, l)`` where
``i = j * k`` for fresh random primes j, k and ``l`` is the decimal digit sum
of j and k mod 10 when the object is selected, or that value plus one mod 10
when it is not. Revealing ``(j, k)`` later lets anyone recompute the tag.
"""
from __future__ import annotations

import enum
import random
import secrets
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import IndexMismatch, InvalidParameter, MalformedFile
from .primes import gen_prime, is_probable_prime

DEFAULT_PRIME_BITS = 512
MIN_PRIME_BITS = 8
MAX_PRIME_BITS = 4096

_CHUNK = 10 ** 18


class Verdict(enum.Enum):
    SELECTED = "Selected"
    NOT_SELECTED = "NotSelected"
    INVALID = "Invalid"


@dataclass(frozen=True)
class Commitment:
    index: int
    i: int
    l: int

    def __post_init__(self):
        if not 0 <= self.l <= 9:
            raise InvalidParameter(f"tag must be a digit 0..9, got {self.l}")


@dataclass(frozen=True)
class RevealKey:
    index: int
    j: int
    k_prime: int


@dataclass(frozen=True)
class SelectionSet:
    universe: int
    chosen: frozenset

    def __init__(self, universe: int, chosen: Iterable[int] = ()):
        chosen = frozenset(chosen)
        if universe < 1:
            raise InvalidParameter("universe size must be >= 1")
        bad = sorted(x for x in chosen if not 1 <= x <= universe)
        if bad:
            raise InvalidParameter(f"indices {bad} outside 1..{universe}")
        object.__setattr__(self, "universe", universe)
        object.__setattr__(self, "chosen", chosen)


def digit_sum_mod10(j: int, k_prime: int) -> int:
    """Sum of the decimal digits of both numbers, mod 10."""
    if j < 1 or k_prime < 1:
        raise InvalidParameter("digit sums are defined for positive integers")
    return (_digit_sum(j) + _digit_sum(k_prime)) % 10


def _digit_sum(n):
    total = 0
    while n:
        n, chunk = divmod(n, _CHUNK)
        while chunk:
            chunk, d = divmod(chunk, 10)
            total += d
    return total


def _tag(base, selected):
    return base if selected else (base + 1) % 10


def _check_bits(bits):
    if not MIN_PRIME_BITS <= bits <= MAX_PRIME_BITS:
        raise InvalidParameter(f"prime bits must lie in {MIN_PRIME_BITS}..{MAX_PRIME_BITS}, got {bits}")


def commit_with_primes(index: int, selected: bool, j: int, k_prime: int):
    """Build the commitment for caller-chosen primes (tests and replays)."""
    base = digit_sum_mod10(j, k_prime)
    return Commitment(index, j * k_prime, _tag(base, selected)), RevealKey(index, j, k_prime)


def commit_object(index: int, selected: bool, bits: int = DEFAULT_PRIME_BITS, rng=None):
    """Commit to one object's selection status with two fresh primes.

    ``rng`` is a seed, a ``random.Random``-like object, or None for the
    system CSPRNG. Returns ``(Commitment, RevealKey)``.
    """
    _check_bits(bits)
    if rng is None:
        rng = secrets.SystemRandom()
    elif isinstance(rng, int):
        rng = random.Random(rng)
    j = gen_prime(bits, rng)
    k_prime = gen_prime(bits, rng)
    while k_prime == j:
        k_prime = gen_prime(bits, rng)
    return commit_with_primes(index, selected, j, k_prime)


def verify_object(c: Commitment, r: RevealKey) -> Verdict:
    if c.index != r.index:
        raise IndexMismatch(f"commitment {c.index} opened with reveal {r.index}")
    if r.j <= 1 or r.k_prime <= 1 or r.j * r.k_prime != c.i:
        return Verdict.INVALID
    base = digit_sum_mod10(r.j, r.k_prime)
    if c.l == base:
        verdict = Verdict.SELECTED
    elif c.l == (base + 1) % 10:
        verdict = Verdict.NOT_SELECTED
    else:
        return Verdict.INVALID
    # primality last: it dominates the cost and cannot rescue a bad tag
    if not (is_probable_prime(r.j) and is_probable_prime(r.k_prime)):
        return Verdict.INVALID
    return verdict


def commit_selection(sel: SelectionSet, bits: int = DEFAULT_PRIME_BITS, seed: Optional[int] = None):
    """Commit every index 1..U; index t draws its primes from ``seed + t``."""
    _check_bits(bits)
    commitments, reveals = [], []
    system = secrets.SystemRandom() if seed is None else None
    for index in range(1, sel.universe + 1):
        rng = system if seed is None else random.Random(seed + index)
        c, r = commit_object(index, index in sel.chosen, bits, rng)
        commitments.append(c)
        reveals.append(r)
    return commitments, reveals


@dataclass
class SelectionReport:
    verdicts: dict
    unrevealed: list

    def count(self, verdict: Verdict) -> int:
        return sum(1 for v in self.verdicts.values() if v is verdict)

    @property
    def selected(self):
        return sorted(i for i, v in self.verdicts.items() if v is Verdict.SELECTED)

    def summary(self) -> str:
        line = (f"selected={self.count(Verdict.SELECTED)} "
                f"not_selected={self.count(Verdict.NOT_SELECTED)} "
                f"invalid={self.count(Verdict.INVALID)}")
        if self.unrevealed:
            line += f" unrevealed={len(self.unrevealed)}"
        return line


def verify_selection(commitments: Sequence[Commitment], reveals: Iterable[RevealKey]) -> SelectionReport:
    """Classify each revealed index; reveals may cover all indices or a subset."""
    by_index = {c.index: c for c in commitments}
    verdicts = {}
    for r in reveals:
        c = by_index.get(r.index)
        if c is None or r.index in verdicts:
            verdicts[r.index] = Verdict.INVALID
            continue
        verdicts[r.index] = verify_object(c, r)
    unrevealed = sorted(set(by_index) - set(verdicts))
    return SelectionReport(dict(sorted(verdicts.items())), unrevealed)


# text file formats -----------------------------------------------------------

def _hex(n):
    return format(n, "x")


def _parse_header(lines, magic):
    if not lines:
        raise MalformedFile("empty file")
    parts = lines[0].split()
    if len(parts) != 2 or parts[0] != magic or not parts[1].startswith("U="):
        raise MalformedFile(f"expected header '{magic} U=<n>', got {lines[0]!r}")
    try:
        universe = int(parts[1][2:])
    except ValueError:
        raise MalformedFile(f"bad universe size in {lines[0]!r}") from None
    if universe < 1:
        raise MalformedFile("universe size must be >= 1")
    return universe


def _parse_rows(lines, universe, ncols):
    rows = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != ncols:
            raise MalformedFile(f"line {lineno}: expected {ncols} fields")
        try:
            index = int(parts[0])
            values = [int(p, 16) for p in parts[1:]]
        except ValueError:
            raise MalformedFile(f"line {lineno}: not an integer field") from None
        if not 1 <= index <= universe:
            raise MalformedFile(f"line {lineno}: index {index} outside 1..{universe}")
        if index in seen:
            raise MalformedFile(f"line {lineno}: index {index} repeated")
        seen.add(index)
        rows.append((index, values))
    return rows


def _split_lines(text):
    return [ln for ln in text.split("\n") if ln.strip()]


def format_commitments(commitments: Sequence[Commitment], universe: Optional[int] = None) -> str:
    universe = len(commitments) if universe is None else universe
    lines = [f"PSC1 U={universe}"]
    lines += [f"{c.index} {_hex(c.i)} {c.l}" for c in commitments]
    return "\n".join(lines) + "\n"


def parse_commitments(text: str):
    lines = _split_lines(text)
    universe = _parse_header(lines, "PSC1")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3 or not parts[2].isdigit() or len(parts[2]) != 1:
            raise MalformedFile(f"line {lineno}: expected '<index> <i hex> <digit>'")
    for (index, (i, tag)) in _parse_rows(lines, universe, 3):
        out.append(Commitment(index, i, tag))
    if len(out) != universe:
        raise MalformedFile(f"header says U={universe} but {len(out)} commitments follow")
    return universe, out


def format_reveals(reveals: Sequence[RevealKey], universe: int) -> str:
    lines = [f"PSR1 U={universe}"]
    lines += [f"{r.index} {_hex(r.j)} {_hex(r.k_prime)}" for r in reveals]
    return "\n".join(lines) + "\n"


def parse_reveals(text: str):
    lines = _split_lines(text)
    universe = _parse_header(lines, "PSR1")
    return universe, [RevealKey(index, j, k) for index, (j, k) in _parse_rows(lines, universe, 3)]
