"""Portable, splittable pseudo-random streams for reproducible sampling.

Dataset reproducibility across implementations requires a generator that is
trivial to re-implement bit-exactly in any language, so we use splitmix64
(Vigna's public-domain mixer) rather than a platform RNG.  The conventions
below are frozen and recorded in dataset manifests under the algorithm id
``splitmix64-u53``:

* state update: ``s += 0x9E3779B97F4A7C15``; output = ``mix64(s)``
* uniform double in [0, 1): top 53 bits of the output, ``(u >> 11) * 2**-53``
* positive uniform in [2**-53, 1): same, with a draw of exactly 0.0 mapped
  to 2**-53
* integer in {lo, ..., hi}: ``lo + floor(uniform() * (hi - lo + 1))``
* child stream seeds: ``derive_seed(master, i)`` is the i-th output
  (0-based) of a splitmix64 stream seeded with ``master``
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

RNG_ALGORITHM = "splitmix64-u53"

_TWO_NEG_53 = 2.0**-53


def mix64(z: int) -> int:
    """splitmix64 output mixer (finalizer) on a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Seed for the ``index``-th child stream of ``master``.

    Equals the ``index``-th output of ``SplitMix64(master)``; child streams
    are therefore independent splitmix64 sequences and generation order or
    parallelism cannot affect their content.
    """
    if index < 0:
        raise ValueError(f"child stream index must be >= 0, got {index}")
    return mix64((master + _GOLDEN * (index + 1)) & _MASK64)


class SplitMix64:
    """Sequential splitmix64 stream with the frozen u53 conventions."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * _TWO_NEG_53

    def uniform_pos(self) -> float:
        """Uniform double in [2**-53, 1); the measure-zero draw 0.0 is bumped."""
        u = self.uniform()
        return u if u > 0.0 else _TWO_NEG_53

    def uniform_in(self, lo: float, hi: float) -> float:
        """Uniform double in [lo, hi)."""
        return lo + (hi - lo) * self.uniform()

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range {lo, ..., hi}."""
        if hi < lo:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        return lo + int(self.uniform() * (hi - lo + 1))
