"""Multi-index combinatorics for derivative bookkeeping.

A multi-index identifies an unordered tuple of coordinate directions by the
per-coordinate repetition counts, so permutation equivalence is structural.
These objects key every momentum map in the package.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache
from typing import Iterator, Sequence

# Displayed coordinate letters; n is fixed per simulation and stays small.
AXIS_LETTERS = "xyzwvu"

# factorial() and choose_count() must stay exactly representable downstream
# (they are consumed as float64 coefficients by the kernels).
_NATIVE_MAX = 2**63 - 1


class MultiIndex:
    """Immutable vector of nonnegative derivative counts."""

    __slots__ = ("_counts",)

    def __init__(self, counts: Sequence[int]):
        counts = tuple(int(c) for c in counts)
        if any(c < 0 for c in counts):
            raise ValueError(f"negative count in multi-index {counts}")
        self._counts = counts

    @property
    def counts(self) -> tuple[int, ...]:
        return self._counts

    @property
    def n(self) -> int:
        return len(self._counts)

    @property
    def order(self) -> int:
        return sum(self._counts)

    def factorial(self) -> int:
        """Product of per-coordinate factorials, checked against native range."""
        out = 1
        for c in self._counts:
            out *= math.factorial(c)
            if out > _NATIVE_MAX:
                raise OverflowError(f"factorial of {self} exceeds native integer range")
        return out

    def extend(self, i: int) -> "MultiIndex":
        """Append one derivative along coordinate ``i``."""
        if not 0 <= i < self.n:
            raise IndexError(f"coordinate {i} out of range for n={self.n}")
        c = list(self._counts)
        c[i] += 1
        return MultiIndex(c)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_same_n(other)
        return MultiIndex(tuple(a + b for a, b in zip(self._counts, other._counts)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        self._check_same_n(other)
        return MultiIndex(tuple(a - b for a, b in zip(self._counts, other._counts)))

    def contains(self, other: "MultiIndex") -> bool:
        """True if ``other`` is a subindex (componentwise <=)."""
        self._check_same_n(other)
        return all(b <= a for a, b in zip(self._counts, other._counts))

    def subindices(self) -> list[tuple["MultiIndex", "MultiIndex", int]]:
        """All different subindices with complements and choice counts.

        Enumerates every nu with nu_i <= sigma_i, paired with sigma minus nu
        and the number of ways nu can be chosen from sigma, which is the
        product of per-coordinate binomials.  The counts over all entries sum
        to 2**order.
        """
        out = []
        for nu_counts in itertools.product(*(range(c + 1) for c in self._counts)):
            nu = MultiIndex(nu_counts)
            comp = self - nu
            count = 1
            for c, k in zip(self._counts, nu_counts):
                count *= math.comb(c, k)
                if count > _NATIVE_MAX:
                    raise OverflowError(f"choice count for {self} exceeds native range")
            out.append((nu, comp, count))
        return out

    def choose_count(self, nu: "MultiIndex") -> int:
        """Number of ways ``nu`` may be chosen from this multi-index."""
        if not self.contains(nu):
            raise ValueError(f"{nu} is not a subindex of {self}")
        count = 1
        for c, k in zip(self._counts, nu._counts):
            count *= math.comb(c, k)
        if count > _NATIVE_MAX:
            raise OverflowError(f"choice count for {self} exceeds native range")
        return count

    def name(self) -> str:
        """Canonical display form: letters repeated by count, '0' when empty."""
        if self.order == 0:
            return "0"
        if self.n > len(AXIS_LETTERS):
            raise ValueError(f"no display letters for n={self.n}")
        return "".join(AXIS_LETTERS[i] * c for i, c in enumerate(self._counts))

    @classmethod
    def from_name(cls, name: str, n: int) -> "MultiIndex":
        """Parse the canonical display form back (exact round trip)."""
        counts = [0] * n
        if name != "0":
            for ch in name:
                i = AXIS_LETTERS.find(ch)
                if i < 0 or i >= n:
                    raise ValueError(f"bad multi-index name {name!r} for n={n}")
                counts[i] += 1
        return cls(counts)

    def _check_same_n(self, other: "MultiIndex") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiIndex) and self._counts == other._counts

    def __hash__(self) -> int:
        return hash(self._counts)

    def sort_key(self) -> tuple:
        """Graded ordering key: by order, then x-major within a grade."""
        return (self.order, tuple(-c for c in self._counts))

    def __lt__(self, other: "MultiIndex") -> bool:
        return self.sort_key() < other.sort_key()

    def __repr__(self) -> str:
        return f"MultiIndex({self._counts})"


def empty(n: int) -> MultiIndex:
    return MultiIndex((0,) * n)


def unit(n: int, i: int) -> MultiIndex:
    return empty(n).extend(i)


def iter_orders(n: int, max_order: int, min_order: int = 0) -> Iterator[MultiIndex]:
    """Multi-indices with min_order <= |sigma| <= max_order in graded order."""
    for total in range(min_order, max_order + 1):
        yield from _fixed_order(n, total)


def _fixed_order(n: int, total: int) -> Iterator[MultiIndex]:
    if n == 1:
        yield MultiIndex((total,))
        return
    for first in range(total, -1, -1):
        for rest in _fixed_order(n - 1, total - first):
            yield MultiIndex((first,) + rest.counts)


@lru_cache(maxsize=None)
def all_upto(n: int, max_order: int, min_order: int = 0) -> tuple[MultiIndex, ...]:
    """Cached tuple of iter_orders; canonical enumeration used by the kernels."""
    out = tuple(iter_orders(n, max_order, min_order))
    # graded order is what packing relies on
    assert list(out) == sorted(out, key=MultiIndex.sort_key)
    return out
