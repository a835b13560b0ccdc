"""Textbook-RSA receipts over SHA-256 digests.

The receiving party signs the digest of a submitted commitment file with its
private exponent and hands the signature back as proof of what it received.
There is no padding scheme; this is demonstration grade.
"""
from __future__ import annotations

import hashlib
import math
import random
import secrets
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidParameter, MalformedFile
from .primes import gen_prime

PUBLIC_EXPONENT = 65537
DEFAULT_RECEIPT_BITS = 2048
MIN_RECEIPT_BITS = 512


@dataclass(frozen=True)
class ReceiptKeyPair:
    n: int
    e: int
    d: int
    # factors are kept when generated here; key files store only n, e, d
    p: Optional[int] = field(default=None, repr=False, compare=False)
    q: Optional[int] = field(default=None, repr=False, compare=False)

    @property
    def public(self):
        return self.n, self.e


def receipt_keygen(bits: int = DEFAULT_RECEIPT_BITS, rng=None) -> ReceiptKeyPair:
    """RSA key pair with an exactly ``bits``-bit modulus and e = 65537."""
    if bits < MIN_RECEIPT_BITS:
        raise InvalidParameter(f"receipt modulus must be >= {MIN_RECEIPT_BITS} bits, got {bits}")
    if rng is None:
        rng = secrets.SystemRandom()
    elif isinstance(rng, int):
        rng = random.Random(rng)
    p_bits = bits // 2
    q_bits = bits - p_bits
    while True:
        p = gen_prime(p_bits, rng)
        q = gen_prime(q_bits, rng)
        if p == q or (p * q).bit_length() != bits:
            continue
        lam = math.lcm(p - 1, q - 1)
        if math.gcd(PUBLIC_EXPONENT, lam) != 1:
            continue
        return ReceiptKeyPair(p * q, PUBLIC_EXPONENT, pow(PUBLIC_EXPONENT, -1, lam), p, q)


def _digest(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest(), "big")


def receipt_sign(data: bytes, keypair: ReceiptKeyPair) -> int:
    return pow(_digest(data), keypair.d, keypair.n)


def receipt_verify(data: bytes, signature: int, public) -> bool:
    n, e = public
    if not 0 <= signature < n:
        return False
    return pow(signature, e, n) == _digest(data)


def format_receipt(public, signature: int) -> str:
    n, e = public
    return f"RCPT1 {n:x} {e} {signature:x}\n"


def parse_receipt(text: str):
    """Return ``((n, e), signature)``."""
    parts = text.split()
    if len(parts) != 4 or parts[0] != "RCPT1":
        raise MalformedFile("expected 'RCPT1 <N hex> <e> <signature hex>'")
    try:
        return (int(parts[1], 16), int(parts[2], 10)), int(parts[3], 16)
    except ValueError:
        raise MalformedFile("receipt fields are not integers") from None


def format_private_key(keypair: ReceiptKeyPair) -> str:
    return f"RKEY1 {keypair.n:x} {keypair.e} {keypair.d:x}\n"


def parse_private_key(text: str) -> ReceiptKeyPair:
    parts = text.split()
    if len(parts) != 4 or parts[0] != "RKEY1":
        raise MalformedFile("expected 'RKEY1 <N hex> <e> <d hex>'")
    try:
        return ReceiptKeyPair(int(parts[1], 16), int(parts[2], 10), int(parts[3], 16))
    except ValueError:
        raise MalformedFile("key fields are not integers") from None
