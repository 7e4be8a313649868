"""Deterministic seed derivation for replications and sub-tasks.

Substream seeds come from a fixed 64-bit mixing function (splitmix64 over
the pair), so concurrent work derived from ``(seed, index)`` pairs is
reproducible and independent of execution order.
"""

from __future__ import annotations

__all__ = ["splitmix64", "substream_seed"]

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 scramble of a 64-bit state."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def substream_seed(seed: int, index: int) -> int:
    """64-bit seed for substream ``index`` of a base ``seed``."""
    return splitmix64(splitmix64(int(seed) & _MASK) ^ (int(index) & _MASK))
