"""Portable seeded shuffling.

Splits and CV folds must be reproducible across implementations, so they do
not use numpy's or Python's generators. The generator is SplitMix64 and the
shuffle is the descending Fisher-Yates variant with ``j = next() % (i + 1)``.
The modulo bias is below 2**-40 for any realistic list length.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

T = TypeVar("T")

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)


def shuffled(items: Sequence[T], seed: int) -> list[T]:
    """Return a Fisher-Yates shuffled copy of ``items``."""
    out = list(items)
    gen = SplitMix64(seed)
    for i in range(len(out) - 1, 0, -1):
        j = gen.next() % (i + 1)
        out[i], out[j] = out[j], out[i]
    return out


def fold_slices(n: int, folds: int) -> list[slice]:
    """Contiguous fold blocks; the remainder goes one row each to the leading folds."""
    if folds < 2 or n < folds:
        raise ValueError(f"cannot form {folds} folds from {n} rows")
    base, extra = divmod(n, folds)
    out, start = [], 0
    for f in range(folds):
        size = base + (1 if f < extra else 0)
        out.append(slice(start, start + size))
        start += size
    return out
