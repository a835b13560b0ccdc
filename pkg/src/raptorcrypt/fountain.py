"""LT fountain code with peeling and GF(2) maximum-likelihood decoding.

Input symbols and coefficient rows are held as Python integers: bit ``i`` of a
row mask marks input symbol ``i`` as a neighbour, and a payload of
``symbol_size`` bytes is the big-endian integer of those bytes. XOR of rows is
then a single integer operation, which keeps elimination over ~1000 columns
fast without numpy.
"""
from __future__ import annotations

import enum
import math
import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

from .errors import InvalidParameter, InvalidSymbol, SeedOverflow
from .prng import MASK64, SymbolPRNG

DEFAULT_C = 0.03
DEFAULT_DELTA = 0.05
LENGTH_PREFIX = 8


@dataclass(frozen=True)
class InputBlock:
    """A message padded to exactly ``k * symbol_size`` bytes.

    Layout: 8-byte big-endian original length, the message, then zero fill.
    """

    data: bytes
    k: int
    symbol_size: int
    pad_len: int

    @classmethod
    def from_message(cls, message: bytes, symbol_size: int) -> "InputBlock":
        if symbol_size < 1:
            raise InvalidParameter("symbol_size must be >= 1")
        message = bytes(message)
        k = block_symbol_count(len(message), symbol_size)
        return cls(message, k, symbol_size, k * symbol_size - len(message))

    def padded(self) -> bytes:
        head = struct.pack(">Q", len(self.data)) + self.data
        return head + bytes(self.k * self.symbol_size - len(head))

    def symbols(self) -> list[int]:
        raw = self.padded()
        size = self.symbol_size
        return [int.from_bytes(raw[i * size:(i + 1) * size], "big") for i in range(self.k)]


def block_symbol_count(message_len: int, symbol_size: int) -> int:
    return -(-(message_len + LENGTH_PREFIX) // symbol_size)


def unpad(padded: bytes) -> bytes:
    if len(padded) < LENGTH_PREFIX:
        raise InvalidSymbol("decoded block shorter than its length prefix")
    (length,) = struct.unpack(">Q", padded[:LENGTH_PREFIX])
    if LENGTH_PREFIX + length > len(padded):
        raise InvalidSymbol(f"length prefix {length} exceeds decoded block")
    return padded[LENGTH_PREFIX:LENGTH_PREFIX + length]


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    k: int
    c: float
    delta: float
    cdf: tuple = field(repr=False)

    def pmf(self, degree: int) -> float:
        if not 1 <= degree <= self.k:
            return 0.0
        lo = self.cdf[degree - 2] if degree > 1 else 0.0
        return self.cdf[degree - 1] - lo

    def sample(self, u: float) -> int:
        return min(bisect_right(self.cdf, u) + 1, self.k)

    def key(self):
        return (self.k, self.c, self.delta)

    def __eq__(self, other):
        return isinstance(other, DegreeDistribution) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def make_distribution(k: int, c: float = DEFAULT_C, delta: float = DEFAULT_DELTA) -> DegreeDistribution:
    """Robust soliton distribution over degrees 1..k."""
    if k < 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if not c > 0:
        raise InvalidParameter(f"c must be > 0, got {c}")
    if not 0 < delta < 1:
        raise InvalidParameter(f"delta must lie in (0, 1), got {delta}")
    return _make_distribution(k, float(c), float(delta))


@lru_cache(maxsize=128)
def _make_distribution(k, c, delta):
    weights = robust_soliton_weights(k, c, delta)
    total = math.fsum(weights)
    cdf = []
    acc = 0.0
    for w in weights:
        acc += w
        cdf.append(acc / total)
    cdf[-1] = 1.0
    return DegreeDistribution(k, c, delta, tuple(cdf))


def robust_soliton_weights(k, c, delta):
    """Unnormalised rho(d) + tau(d) for d = 1..k."""
    if k == 1:
        return [1.0]
    R = c * math.log(k / delta) * math.sqrt(k)
    spike = min(max(int(k / R), 1), k)
    weights = []
    for d in range(1, k + 1):
        rho = 1.0 / k if d == 1 else 1.0 / (d * (d - 1))
        if d < spike:
            tau = R / (d * k)
        elif d == spike:
            tau = R * math.log(R / delta) / k
        else:
            tau = 0.0
        # ln(R/delta) goes negative for tiny R; never let the spike remove mass
        weights.append(rho + max(tau, 0.0))
    return weights


def symbol_neighbors(seed: int, k: int, dist: DegreeDistribution) -> frozenset:
    if dist.k != k:
        raise InvalidParameter(f"distribution built for k={dist.k}, not {k}")
    return _neighbors(seed, dist)[0]


@lru_cache(maxsize=1 << 16)
def _neighbors(seed, dist):
    # returns (index set, row bitmask); memoised because simulations re-derive
    # the same seeds for every trial
    rng = SymbolPRNG(seed)
    degree = dist.sample(rng.uniform())
    picked = rng.sample_distinct(degree, dist.k)
    mask = 0
    for i in picked:
        mask |= 1 << i
    return frozenset(picked), mask


class Precode:
    """Dense random parity precode of rate ``rate`` (optional).

    Intermediate symbols are the k input symbols followed by ``L - k`` parity
    symbols, each the XOR of a pseudorandom half of the inputs. LT symbols are
    then drawn over the L intermediates.
    """

    def __init__(self, k: int, seed: int = 0, rate: float = 0.95):
        if k < 1:
            raise InvalidParameter("k must be >= 1")
        if not 0 < rate <= 1:
            raise InvalidParameter("rate must lie in (0, 1]")
        self.k = k
        self.seed = seed
        self.rate = rate
        self.L = math.ceil(k / rate - 1e-9)
        rng = SymbolPRNG(seed)
        words = -(-k // 64)
        self.parity_masks = []
        for _ in range(self.L - k):
            m = 0
            for w in range(words):
                m |= rng.next_u64() << (64 * w)
            m &= (1 << k) - 1
            self.parity_masks.append(m)

    def intermediate(self, inputs: Sequence[int]) -> list[int]:
        out = list(inputs)
        for m in self.parity_masks:
            out.append(_xor_selected(inputs, m))
        return out

    def to_input_mask(self, mask: int) -> int:
        out = mask & ((1 << self.k) - 1)
        high = mask >> self.k
        t = 0
        while high:
            if high & 1:
                out ^= self.parity_masks[t]
            high >>= 1
            t += 1
        return out


def _xor_selected(values, mask):
    acc = 0
    while mask:
        low = mask & -mask
        acc ^= values[low.bit_length() - 1]
        mask ^= low
    return acc


@dataclass(frozen=True)
class EncodedSymbol:
    seed: int
    payload: bytes


def encode_symbol(block: InputBlock, seed: int, dist: DegreeDistribution,
                  precode: Optional[Precode] = None) -> EncodedSymbol:
    values = block.symbols()
    if precode is not None:
        values = precode.intermediate(values)
    return _encode(values, block.k, block.symbol_size, seed, dist, precode)


def _encode(values, k, symbol_size, seed, dist, precode):
    width = precode.L if precode is not None else k
    if dist.k != width:
        raise InvalidParameter(f"distribution built for k={dist.k}, expected {width}")
    _, mask = _neighbors(seed, dist)
    return EncodedSymbol(seed, _xor_selected(values, mask).to_bytes(symbol_size, "big"))


def encode_stream(block: InputBlock, dist: DegreeDistribution, seed_start: int, count: int,
                  precode: Optional[Precode] = None) -> list[EncodedSymbol]:
    if count < 0:
        raise InvalidParameter("count must be >= 0")
    if seed_start < 0 or (count and seed_start + count - 1 > MASK64):
        raise SeedOverflow(f"seeds {seed_start}..{seed_start + count - 1} leave the u64 range")
    values = block.symbols()
    if precode is not None:
        values = precode.intermediate(values)
    return [_encode(values, block.k, block.symbol_size, seed_start + t, dist, precode)
            for t in range(count)]


class Outcome(enum.Enum):
    DECODED = "Decoded"
    UNDECODABLE = "Undecodable"


@dataclass(frozen=True)
class DecodeReport:
    outcome: Outcome
    recovered: Optional[bytes]
    rank: int
    symbols_used: int

    @property
    def ok(self) -> bool:
        return self.outcome is Outcome.DECODED


def decode(symbols: Iterable[EncodedSymbol], k: int, symbol_size: int, dist: DegreeDistribution,
           precode: Optional[Precode] = None, force_ml: bool = False) -> DecodeReport:
    """Recover the message from encoded symbols.

    Peels degree-one symbols first, then finishes with Gaussian elimination
    on whatever is left. ``force_ml`` skips peeling entirely.
    """
    width = precode.L if precode is not None else k
    if dist.k != width:
        raise InvalidParameter(f"distribution built for k={dist.k}, expected {width}")
    rows = []
    seen = set()
    for sym in symbols:
        if len(sym.payload) != symbol_size:
            raise InvalidSymbol(
                f"symbol {sym.seed} has {len(sym.payload)} payload bytes, expected {symbol_size}")
        if sym.seed in seen:
            continue
        seen.add(sym.seed)
        mask = _neighbors(sym.seed, dist)[1]
        if precode is not None:
            mask = precode.to_input_mask(mask)
        rows.append([mask, int.from_bytes(sym.payload, "big")])

    solution, rank = solve_gf2(rows, k, peel=not force_ml)
    if solution is None:
        return DecodeReport(Outcome.UNDECODABLE, None, rank, len(rows))
    padded = b"".join(v.to_bytes(symbol_size, "big") for v in solution)
    return DecodeReport(Outcome.DECODED, unpad(padded), rank, len(rows))


def solve_gf2(rows, k, peel=True):
    """Solve ``mask . x = value`` over GF(2) for k unknowns.

    ``rows`` is a list of ``[mask, value]`` pairs and is consumed. Returns
    ``(solution or None, rank)``; the solution exists iff rank == k.
    """
    solved = {}
    if peel:
        _peel(rows, k, solved)
        # substitute is already done in place; drop emptied rows
        rows = [r for r in rows if r[0]]

    # incremental echelon basis: pivot = lowest set bit, rows kept in input order
    basis = {}
    for mask, value in rows:
        while mask:
            low = mask & -mask
            hit = basis.get(low)
            if hit is None:
                basis[low] = (mask, value)
                break
            mask ^= hit[0]
            value ^= hit[1]
    rank = len(solved) + len(basis)
    if rank < k:
        return None, rank

    # each basis row only has bits at or above its pivot: back-substitute top-down
    for low in sorted(basis, reverse=True):
        mask, value = basis[low]
        col = low.bit_length() - 1
        rest = mask ^ low
        while rest:
            b = rest & -rest
            value ^= solved[b.bit_length() - 1]
            rest ^= b
        solved[col] = value
    return [solved[i] for i in range(k)], rank


def _peel(rows, k, solved):
    by_col = [[] for _ in range(k)]
    ripple = []
    for idx, (mask, _) in enumerate(rows):
        m = mask
        while m:
            low = m & -m
            by_col[low.bit_length() - 1].append(idx)
            m ^= low
        if mask and mask & (mask - 1) == 0:
            ripple.append(idx)
    while ripple:
        idx = ripple.pop()
        mask, value = rows[idx]
        if not mask or mask & (mask - 1):
            continue
        col = mask.bit_length() - 1
        solved[col] = value
        rows[idx][0] = 0
        for other in by_col[col]:
            row = rows[other]
            if row[0] & mask:
                row[0] ^= mask
                row[1] ^= value
                m = row[0]
                if m and m & (m - 1) == 0:
                    ripple.append(other)
