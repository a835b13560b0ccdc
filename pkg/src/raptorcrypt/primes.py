"""Miller-Rabin primality and random prime generation."""
import random
import secrets

try:
    from gmpy2 import powmod
except ImportError:  # pragma: no cover
    powmod = pow

MR_ROUNDS = 64

_SMALL_PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, int(p ** 0.5) + 1))]


def _resolve_rng(rng):
    if rng is None:
        return secrets.SystemRandom()
    if isinstance(rng, int):
        return random.Random(rng)
    return rng


def is_probable_prime(n, rounds=MR_ROUNDS, rng=None):
    """Miller-Rabin with ``rounds`` independent random bases.

    False-positive probability is at most 4**-rounds (2**-128 at the default).
    """
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n == p:
            return True
        if n % p == 0:
            return False
    rng = _resolve_rng(rng)
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = powmod(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def gen_prime(bits=512, rng=None):
    """Random odd probable prime with exactly ``bits`` bits.

    ``rng`` may be a seed, a ``random.Random``-like object, or None for the
    system CSPRNG.
    """
    if bits < 8:
        raise ValueError(f"bits must be >= 8, got {bits}")
    rng = _resolve_rng(rng)
    top = 1 << (bits - 1)
    while True:
        candidate = rng.getrandbits(bits) | top | 1
        if is_probable_prime(candidate, rng=rng):
            return candidate
