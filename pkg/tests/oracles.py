"""Independent reference computations used to check the package.

These deliberately avoid the package's own code paths: explicit 0/1 matrices
instead of bitmask rows, decimal strings instead of divmod, trial division
instead of Miller-Rabin.
"""
import math


def naive_gf2_solve(matrix, rhs):
    """Row-reduce an explicit 0/1 matrix with byte right-hand sides.

    ``matrix`` is a list of lists of 0/1 (m rows, k columns) and ``rhs`` a list
    of ints. Returns ``(solution list or None, rank)``.
    """
    rows = [list(r) for r in matrix]
    vals = list(rhs)
    m = len(rows)
    k = len(rows[0]) if rows else 0
    pivot_row = 0
    pivots = []
    for col in range(k):
        sel = None
        for r in range(pivot_row, m):
            if rows[r][col] == 1:
                sel = r
                break
        if sel is None:
            continue
        rows[pivot_row], rows[sel] = rows[sel], rows[pivot_row]
        vals[pivot_row], vals[sel] = vals[sel], vals[pivot_row]
        for r in range(m):
            if r != pivot_row and rows[r][col] == 1:
                rows[r] = [a ^ b for a, b in zip(rows[r], rows[pivot_row])]
                vals[r] ^= vals[pivot_row]
        pivots.append(col)
        pivot_row += 1
    rank = len(pivots)
    if rank < k:
        return None, rank
    solution = [0] * k
    for r, col in enumerate(pivots):
        solution[col] = vals[r]
    return solution, rank


def robust_soliton_p1(k, c, delta):
    """P(degree = 1) straight from the closed-form rho + tau, spike at floor(k/R)."""
    R = c * math.log(k / delta) * math.sqrt(k)
    spike = int(k / R)
    rho = [0.0] * (k + 1)
    tau = [0.0] * (k + 1)
    rho[1] = 1 / k
    for d in range(2, k + 1):
        rho[d] = 1 / (d * (d - 1))
    for d in range(1, spike):
        tau[d] = R / (d * k)
    tau[spike] = R * math.log(R / delta) / k
    beta = sum(rho) + sum(tau)
    return (rho[1] + tau[1]) / beta


def scan_fragment_size(s, k, hi_num=11, hi_den=10, lo_num=99, lo_den=100, f_max=2000):
    """Smallest f in 1..f_max meeting both inequalities, using integer arithmetic."""
    need = -(-hi_num * k // hi_den)
    cap = lo_num * k // lo_den
    for f in range(1, f_max + 1):
        if s * f >= need:
            if (s - 1) * f <= cap and (s - 1) * f < k:
                return f
            return None
    return None


def string_digit_sum_mod10(*numbers):
    return sum(int(ch) for n in numbers for ch in str(n)) % 10


def is_prime_trial(n):
    if n < 2:
        return False
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            return False
    return True


def factor_semiprime(n):
    """All factorisations n = a * b with a <= b, both prime, by trial division."""
    out = []
    for a in range(2, math.isqrt(n) + 1):
        if n % a == 0 and is_prime_trial(a) and is_prime_trial(n // a):
            out.append((a, n // a))
    return out


class DecodeCase:
    def __init__(self, k, dist, symbols, oracle_rank, oracle_recovered):
        self.k = k
        self.dist = dist
        self.symbols = symbols
        self.oracle_rank = oracle_rank
        self.oracle_recovered = oracle_recovered


def random_decode_case(rng):
    """A k <= 10, 1-byte-symbol decode instance with its naive-elimination answer.

    Neighbour sets come from the package (they define the code); the expected
    outcome and bytes come from row-reducing the materialised 0/1 matrix.
    """
    from raptorcrypt.fountain import EncodedSymbol, InputBlock, make_distribution, symbol_neighbors

    msg = rng.randbytes(rng.randint(0, 2))
    block = InputBlock.from_message(msg, 1)
    k = block.k
    dist = make_distribution(k)
    padded = block.padded()
    m = rng.randint(k - 3, 3 * k)
    seeds = [rng.randrange(1 << 64) for _ in range(m)]
    if m > 2 and rng.random() < 0.2:
        seeds[-1] = seeds[0]  # exercise dedup
    symbols, matrix, rhs, seen = [], [], [], set()
    for seed in seeds:
        nbrs = symbol_neighbors(seed, k, dist)
        value = 0
        for i in nbrs:
            value ^= padded[i]
        symbols.append(EncodedSymbol(seed, bytes([value])))
        if seed not in seen:
            seen.add(seed)
            matrix.append([1 if i in nbrs else 0 for i in range(k)])
            rhs.append(value)
    solution, rank = naive_gf2_solve(matrix, rhs) if matrix else (None, 0)
    recovered = None
    if solution is not None:
        raw = bytes(solution)
        length = int.from_bytes(raw[:8], "big")
        recovered = raw[8:8 + length]
    return DecodeCase(k, dist, symbols, rank, recovered)
