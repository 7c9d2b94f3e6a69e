"""Seedable, platform-portable random number generation.

Corpus synthesis must be byte-reproducible across machines and Python
versions, so nothing here depends on ``random`` or NumPy bit streams.
The generator is a splitmix-style 64-bit mixer: pure integer arithmetic,
identical output everywhere. Each dialogue derives its own independent
stream from ``(corpus_seed, dialogue_index)`` via :func:`derive_seed`.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

T = TypeVar("T")


def mix64(z: int) -> int:
    """One splitmix64 finalizer round over a 64-bit word."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(root: int, *parts: int | str) -> int:
    """Derive an independent stream seed from a root seed and a key path.

    Parts may be ints (e.g. a dialogue index) or short strings (e.g.
    ``"split"``); distinct paths give statistically independent streams.
    """
    h = mix64(root ^ _GOLDEN)
    for part in parts:
        if isinstance(part, str):
            h = mix64(h ^ 0x5354524B)  # domain-separate strings from ints
            for b in part.encode("utf-8"):
                h = mix64(h ^ b)
        else:
            h = mix64(h ^ (part & _MASK64))
    return h


class SplitMix64:
    """Deterministic 64-bit generator with the sampling helpers we need."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        """Uniform int in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("randrange() arg must be positive")
        threshold = (1 << 64) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("cannot choose from an empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def weighted_choice(self, items: Sequence[T], weights: Sequence[float]) -> T:
        """Choose items[i] with probability weights[i] / sum(weights).

        Integer weights are sampled exactly (no float rounding), which
        keeps frequency-weighted utterance draws reproducible.
        """
        if len(items) != len(weights) or not items:
            raise ValueError("items and weights must be equal-length and non-empty")
        if all(isinstance(w, int) for w in weights):
            total = sum(weights)
            if total <= 0:
                raise ValueError("total weight must be positive")
            pick = self.randrange(total)
            acc = 0
            for item, w in zip(items, weights):
                acc += w
                if pick < acc:
                    return item
            raise AssertionError("unreachable")
        total_f = float(sum(weights))
        if total_f <= 0.0 or any(w < 0 for w in weights):
            raise ValueError("weights must be non-negative with positive sum")
        pick_f = self.random() * total_f
        acc_f = 0.0
        for item, w in zip(items, weights):
            acc_f += w
            if pick_f < acc_f:
                return item
        return items[-1]  # guard against float round-off at the top end
