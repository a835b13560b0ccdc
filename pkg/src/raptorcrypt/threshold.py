"""s-of-n presence checking with fountain-code fragments.

Every member holds ``f`` encoded symbols of a random key. Fragment size is
chosen so that any ``s`` members together hold at least ``overhead_hi * k``
symbols (decodable with high probability) while any ``s - 1`` hold at most
``overhead_lo * k`` < k symbols, which can never reach rank k.
"""
from __future__ import annotations

import math
import os
import random
import struct
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (DuplicateMember, InfeasibleThreshold, InvalidKey, InvalidParameter,
                     MalformedFragment, MixedKeyId)
from .fountain import (DEFAULT_C, DEFAULT_DELTA, DecodeReport, EncodedSymbol, InputBlock,
                       block_symbol_count, decode, encode_stream, make_distribution)
from .prng import MASK64

DEFAULT_OVERHEAD_HI = 1.1
DEFAULT_OVERHEAD_LO = 0.99
KEY_ID_LEN = 16

MAGIC = b"RCF1"
VERSION = 1
_HEADER = struct.Struct(">4sB16sIIIHIIdd")
_SEED = struct.Struct(">Q")


def _exact(x) -> Fraction:
    # go through the shortest decimal repr so 1.1 means 11/10, not the binary float
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def max_threshold(overhead_hi: float = DEFAULT_OVERHEAD_HI,
                  overhead_lo: float = DEFAULT_OVERHEAD_LO) -> int:
    """Largest s for which both fragment-size inequalities can hold.

    floor(hi / (hi - lo)); with the default overheads this is 10.
    """
    hi, lo = _exact(overhead_hi), _exact(overhead_lo)
    if not 0 < lo < hi:
        raise InvalidParameter(f"need 0 < overhead_lo < overhead_hi, got {overhead_lo}, {overhead_hi}")
    return math.floor(hi / (hi - lo))


@dataclass(frozen=True)
class ThresholdPlan:
    n: int
    s: int
    k: int
    f: int
    symbol_size: int = 1
    overhead_hi: float = DEFAULT_OVERHEAD_HI
    overhead_lo: float = DEFAULT_OVERHEAD_LO
    c: float = DEFAULT_C
    delta: float = DEFAULT_DELTA

    def __post_init__(self):
        if not 2 <= self.s <= self.n:
            raise InvalidParameter(f"need 2 <= s <= n, got s={self.s}, n={self.n}")
        if self.k < 1 or self.f < 1 or self.symbol_size < 1:
            raise InvalidParameter("k, f and symbol_size must be >= 1")
        if self.s * self.f < self.min_total_symbols:
            raise InvalidParameter(f"{self.s}*{self.f} < ceil({self.overhead_hi}*{self.k})")
        if (self.s - 1) * self.f > self.max_short_symbols:
            raise InvalidParameter(f"{self.s - 1}*{self.f} > floor({self.overhead_lo}*{self.k})")
        if (self.s - 1) * self.f >= self.k:
            raise InvalidParameter(f"{self.s - 1}*{self.f} >= k={self.k}")
        if self.n * self.f - 1 > MASK64:
            raise InvalidParameter("n*f seeds do not fit in 64 bits")

    @property
    def min_total_symbols(self) -> int:
        return math.ceil(_exact(self.overhead_hi) * self.k)

    @property
    def max_short_symbols(self) -> int:
        return math.floor(_exact(self.overhead_lo) * self.k)

    @property
    def total_symbols(self) -> int:
        return self.n * self.f

    @property
    def key_len(self) -> int:
        """Longest key that still pads to exactly k symbols."""
        return self.k * self.symbol_size - 8

    def distribution(self):
        return make_distribution(self.k, self.c, self.delta)


def plan_threshold(n: int, s: int, key_len: int, symbol_size: int = 1,
                   overhead_hi: float = DEFAULT_OVERHEAD_HI,
                   overhead_lo: float = DEFAULT_OVERHEAD_LO,
                   c: float = DEFAULT_C, delta: float = DEFAULT_DELTA) -> ThresholdPlan:
    """Pick the smallest uniform fragment size for an s-of-n split.

    Raises InfeasibleThreshold when no integer f satisfies both
    ``s*f >= ceil(hi*k)`` and ``(s-1)*f <= floor(lo*k)`` (with ``(s-1)*f < k``).
    """
    if key_len < 1:
        raise InvalidParameter("key_len must be >= 1")
    if symbol_size < 1:
        raise InvalidParameter("symbol_size must be >= 1")
    if s < 2:
        raise InvalidParameter(f"s must be >= 2, got {s}")
    limit = max_threshold(overhead_hi, overhead_lo)
    if s > limit:
        raise InfeasibleThreshold(
            f"s={s} exceeds the maximum threshold {limit} for overheads "
            f"({overhead_hi}, {overhead_lo}): (s-1)*f <= floor({overhead_lo}*k) cannot hold "
            f"together with s*f >= ceil({overhead_hi}*k)",
            reason="above_maximum")
    if s > n:
        raise InvalidParameter(f"s={s} exceeds group size n={n}")

    k = block_symbol_count(key_len, symbol_size)
    need = math.ceil(_exact(overhead_hi) * k)
    cap = math.floor(_exact(overhead_lo) * k)
    f = -(-need // s)
    short = (s - 1) * f
    if short > cap or short >= k:
        raise InfeasibleThreshold(
            f"k={k} is too small for s={s}: smallest f={f} meeting s*f >= {need} gives "
            f"(s-1)*f = {short}, violating (s-1)*f <= floor({overhead_lo}*k) = {cap}"
            + ("" if short < k else " and (s-1)*f < k"),
            reason="rounding")
    return ThresholdPlan(n, s, k, f, symbol_size, overhead_hi, overhead_lo, c, delta)


@dataclass(frozen=True)
class Fragment:
    key_id: bytes
    member_id: int
    n: int
    s: int
    k: int
    f: int
    symbol_size: int
    c: float
    delta: float
    symbols: tuple

    def echo(self):
        return (self.n, self.s, self.k, self.f, self.symbol_size, self.c, self.delta)

    def check(self):
        if len(self.key_id) != KEY_ID_LEN:
            raise MalformedFragment(f"key_id must be {KEY_ID_LEN} bytes")
        if not 0 <= self.member_id < self.n:
            raise MalformedFragment(f"member_id {self.member_id} outside 0..{self.n - 1}")
        if len(self.symbols) != self.f:
            raise MalformedFragment(f"member {self.member_id}: {len(self.symbols)} symbols, expected {self.f}")
        if self.s < 2 or self.s > self.n or (self.s - 1) * self.f >= self.k:
            raise MalformedFragment(f"member {self.member_id}: inconsistent plan header")
        if not (self.c > 0 and 0 < self.delta < 1):
            raise MalformedFragment(f"member {self.member_id}: bad degree distribution parameters")
        first = self.member_id * self.f
        for t, sym in enumerate(self.symbols):
            if sym.seed != first + t:
                raise MalformedFragment(f"member {self.member_id}: seed {sym.seed} out of its range")
            if len(sym.payload) != self.symbol_size:
                raise MalformedFragment(f"member {self.member_id}: bad payload length")

    def to_bytes(self) -> bytes:
        parts = [_HEADER.pack(MAGIC, VERSION, self.key_id, self.k, self.symbol_size, self.n,
                              self.s, self.f, self.member_id, self.c, self.delta)]
        for sym in self.symbols:
            parts.append(_SEED.pack(sym.seed))
            parts.append(sym.payload)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, raw: bytes) -> "Fragment":
        if len(raw) < _HEADER.size:
            raise MalformedFragment("truncated fragment header")
        magic, version, key_id, k, size, n, s, f, member, c, delta = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise MalformedFragment(f"bad magic {magic!r}")
        if version != VERSION:
            raise MalformedFragment(f"unsupported fragment version {version}")
        if size < 1:
            raise MalformedFragment("symbol_size must be >= 1")
        record = _SEED.size + size
        if len(raw) != _HEADER.size + f * record:
            raise MalformedFragment(f"expected {f} records of {record} bytes")
        symbols = []
        pos = _HEADER.size
        for _ in range(f):
            (seed,) = _SEED.unpack_from(raw, pos)
            symbols.append(EncodedSymbol(seed, raw[pos + _SEED.size:pos + record]))
            pos += record
        frag = cls(key_id, member, n, s, k, f, size, c, delta, tuple(symbols))
        frag.check()
        return frag


def new_key_id() -> bytes:
    return os.urandom(KEY_ID_LEN)


def split_key(key: bytes, plan: ThresholdPlan, key_id: Optional[bytes] = None) -> list[Fragment]:
    """Encode ``key`` into ``plan.n`` fragments; member i gets seeds i*f .. i*f+f-1."""
    key = bytes(key)
    if not key:
        raise InvalidKey("key must not be empty")
    if block_symbol_count(len(key), plan.symbol_size) != plan.k:
        raise InvalidKey(f"a {len(key)}-byte key does not pad to k={plan.k} symbols")
    if key_id is None:
        key_id = new_key_id()
    if len(key_id) != KEY_ID_LEN:
        raise InvalidParameter(f"key_id must be {KEY_ID_LEN} bytes")
    block = InputBlock.from_message(key, plan.symbol_size)
    stream = encode_stream(block, plan.distribution(), 0, plan.total_symbols)
    f = plan.f
    return [Fragment(bytes(key_id), m, plan.n, plan.s, plan.k, f, plan.symbol_size,
                     plan.c, plan.delta, tuple(stream[m * f:(m + 1) * f]))
            for m in range(plan.n)]


def combine_report(fragments: Sequence[Fragment]) -> DecodeReport:
    if not fragments:
        raise MalformedFragment("no fragments given")
    first = fragments[0]
    members = set()
    for frag in fragments:
        if frag.key_id != first.key_id:
            raise MixedKeyId(f"fragments from key ids {first.key_id.hex()} and {frag.key_id.hex()}")
        if frag.echo() != first.echo():
            raise MalformedFragment(f"member {frag.member_id}: plan header differs from member {first.member_id}")
        frag.check()
        if frag.member_id in members:
            raise DuplicateMember(f"member {frag.member_id} given twice")
        members.add(frag.member_id)
    symbols = [sym for frag in fragments for sym in frag.symbols]
    dist = make_distribution(first.k, first.c, first.delta)
    return decode(symbols, first.k, first.symbol_size, dist)


def combine_fragments(fragments: Sequence[Fragment]) -> Optional[bytes]:
    """Return the key, or None when the pooled symbols do not reach rank k."""
    return combine_report(fragments).recovered


def simulate_decodability(plan: ThresholdPlan, subset_size: int, trials: int,
                          base_seed: int = 0) -> float:
    """Fraction of random split/combine experiments that recover the key.

    Trial t draws its key, key id and member subset from ``base_seed + t``.
    """
    if trials < 1:
        raise InvalidParameter("trials must be >= 1")
    if not 1 <= subset_size <= plan.n:
        raise InvalidParameter(f"subset_size must lie in 1..{plan.n}")
    wins = 0
    for t in range(trials):
        rng = random.Random(base_seed + t)
        key = rng.randbytes(plan.key_len)
        key_id = rng.randbytes(KEY_ID_LEN)
        members = rng.sample(range(plan.n), subset_size)
        fragments = split_key(key, plan, key_id)
        recovered = combine_fragments([fragments[m] for m in members])
        wins += recovered == key
    return wins / trials
