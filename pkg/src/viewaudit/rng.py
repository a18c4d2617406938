"""Seeded deterministic random draws for traffic generation.

Generators must replay bit-identically across platforms and Python versions,
so this module pins the exact algorithm instead of relying on library
internals: a splitmix64 state walk produces 64-bit words, uniforms are taken
as word / 2**64, exponentials by inversion, and Poisson counts by Knuth's
product-of-uniforms method. Child streams are derived by hashing a label into
the parent seed, so adding a stream never perturbs its siblings.
"""

from __future__ import annotations

import hashlib
import math

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output_word)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, z


def hash_to_unit(text: str) -> float:
    """Map a string to a stable phase in [0, 1) via sha256."""
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


class Rng:
    """Deterministic stream of draws from a 64-bit seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def derive(self, label: str) -> "Rng":
        """Create an independent child stream keyed by a label."""
        digest = hashlib.sha256(f"{self._state}:{label}".encode("utf-8")).digest()
        return Rng(int.from_bytes(digest[:8], "big"))

    def next_u64(self) -> int:
        self._state, word = splitmix64(self._state)
        return word

    def uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        return self.next_u64() / 2**64

    def uniform_int(self, upper: int) -> int:
        """Uniform integer in [0, upper)."""
        if upper <= 0:
            raise ValueError("upper must be positive")
        return int(self.uniform() * upper)

    def exponential(self, mean: float) -> float:
        """Exponential draw with the given mean, by inversion."""
        if mean <= 0:
            raise ValueError("mean must be positive")
        u = self.uniform()
        return -mean * math.log(1.0 - u)

    def poisson(self, lam: float) -> int:
        """Poisson draw (Knuth); intended for modest rates (lam <= ~100)."""
        if lam < 0:
            raise ValueError("lam must be >= 0")
        if lam == 0:
            return 0
        threshold = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= self.uniform()
            if p <= threshold:
                return k
            k += 1

    def choice(self, items):
        return items[self.uniform_int(len(items))]


__all__ = ["Rng", "splitmix64", "hash_to_unit"]
