"""Portable 64-bit generator used for neighbour sampling.

The constants and output mixing are fixed so that symbol seeds produce the
same neighbour sets in every implementation that reads our fragment files.
"""

MASK64 = (1 << 64) - 1
_MUL = 6364136223846793005
_INC = 1442695040888963407
TWO64 = 1 << 64


class SymbolPRNG:
    __slots__ = ("state",)

    def __init__(self, seed):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self):
        self.state = (self.state * _MUL + _INC) & MASK64
        s = self.state
        return s ^ (s >> 33)

    def uniform(self):
        """Draw a float in [0, 1) as output / 2**64."""
        return self.next_u64() / TWO64

    def below(self, bound):
        """Unbiased integer in [0, bound) by rejecting the top partial bucket."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (TWO64 // bound) * bound
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def sample_distinct(self, count, population):
        """Partial Fisher-Yates over a virtual array 0..population-1."""
        swapped = {}
        out = []
        for i in range(count):
            j = i + self.below(population - i)
            vi = swapped.get(i, i)
            vj = swapped.get(j, j)
            swapped[j] = vi
            out.append(vj)
        return out
