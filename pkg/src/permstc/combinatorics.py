"""Multiset permutations in transposition Gray-code order.

A multiset is described by its multiplicity vector ``m = (m_0, ..., m_{k-1})``;
a permutation is a tuple over the symbols ``0..k-1`` in which symbol ``i``
occurs exactly ``m_i`` times.

The Gray list is built by nesting homogeneous combination Gray codes
(Eades-McKay): the positions of symbol 0 are enumerated by a combination code
in which every step moves one non-zero symbol across a run of zeros only, so
the word formed by the remaining symbols is left intact; that word is in turn
enumerated recursively and traversed forwards and backwards alternately.
Every step of the final list is a single transposition.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .errors import DomainMismatchError, InvalidRateError, InvalidSpecError, ResourceLimitError

Permutation = tuple[int, ...]

#: Largest multinomial accepted by :func:`count_multiset_perms` by default.
INT64_MAX = 2**63 - 1
#: Default guard on the length of a generated Gray list.
MAX_GRAY_LENGTH = 2_000_000


@dataclass(frozen=True)
class MultisetSpec:
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.multiplicities)
        if not m:
            raise InvalidSpecError("multiset needs at least one symbol")
        if any(v < 1 for v in m):
            raise InvalidSpecError(f"multiplicities must be positive, got {m}")
        object.__setattr__(self, "multiplicities", m)

    @property
    def k(self) -> int:
        return len(self.multiplicities)

    @property
    def n(self) -> int:
        return sum(self.multiplicities)

    def identity(self) -> Permutation:
        """The sorted arrangement ``(0^(m_0), 1^(m_1), ...)``."""
        return tuple(i for i, mi in enumerate(self.multiplicities) for _ in range(mi))

    def contains(self, perm: Sequence[int]) -> bool:
        return Counter(perm) == Counter(dict(enumerate(self.multiplicities)))


def _as_spec(spec) -> MultisetSpec:
    return spec if isinstance(spec, MultisetSpec) else MultisetSpec(tuple(spec))


def count_multiset_perms(spec, limit: int | None = INT64_MAX) -> int:
    """Number of distinct arrangements ``n! / (m_1! ... m_k!)``.

    Parameters
    ----------
    spec : MultisetSpec or sequence of int
        Multiplicity vector.
    limit : int or None
        Largest admissible result; ``None`` disables the check.

    Raises
    ------
    OverflowError
        If the multinomial exceeds ``limit``.
    """
    spec = _as_spec(spec)
    total, left = 1, 0
    for mi in spec.multiplicities:
        left += mi
        total *= math.comb(left, mi)
    if limit is not None and total > limit:
        raise OverflowError(f"multinomial {total} exceeds limit {limit}")
    return total


@lru_cache(maxsize=None)
def _eades_mckay(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    # bitstrings of length n with k ones; successive strings differ by moving
    # a single one across zeros only
    if k == 0:
        return ((0,) * n,)
    if k == n:
        return ((1,) * n,)
    out = [s + (0,) for s in _eades_mckay(n - 1, k)]
    out += [s + (0, 1) for s in reversed(_eades_mckay(n - 2, k - 1))]
    if k >= 2:
        out += [s + (1, 1) for s in _eades_mckay(n - 2, k - 2)]
    return tuple(out)


def combination_gray(n: int, k: int) -> list[tuple[int, ...]]:
    """Homogeneous combination Gray code starting at ``0^(n-k) 1^k``.

    This is the Eades-McKay sequence traversed backwards.
    """
    if not 0 <= k <= n:
        raise InvalidSpecError(f"need 0 <= k <= n, got n={n}, k={k}")
    return list(reversed(_eades_mckay(n, k)))


def _gray(m: tuple[int, ...]) -> list[Permutation]:
    n = sum(m)
    if len(m) == 1:
        return [(0,) * n]
    outer = combination_gray(n, n - m[0])
    inner = [tuple(s + 1 for s in w) for w in _gray(m[1:])]
    out = []
    for t, mask in enumerate(outer):
        for word in (inner if t % 2 == 0 else reversed(inner)):
            it = iter(word)
            out.append(tuple(next(it) if bit else 0 for bit in mask))
    return out


def gen_gray_order(spec, max_count: int = MAX_GRAY_LENGTH) -> list[Permutation]:
    """All multiset permutations, adjacent entries one transposition apart.

    The list starts with the sorted arrangement :meth:`MultisetSpec.identity`.

    Raises
    ------
    ResourceLimitError
        If the number of permutations exceeds ``max_count``.
    """
    spec = _as_spec(spec)
    count = count_multiset_perms(spec, limit=None)
    if count > max_count:
        raise ResourceLimitError(f"{count} permutations exceed the guard of {max_count}")
    return _gray(spec.multiplicities)


def select_evenly(perms: Sequence[Permutation], N: int) -> list[Permutation]:
    """Every ``floor(M/N)``-th entry, starting at index 0, ``N`` entries in total."""
    M = len(perms)
    if N < 1:
        raise InvalidRateError(f"N must be positive, got {N}")
    if N > M:
        raise InvalidRateError(f"cannot select {N} of {M} permutations; use a richer initial vector")
    stride = M // N
    return [perms[i * stride] for i in range(N)]


def transposition_distance(p: Sequence[int], q: Sequence[int]) -> int:
    """Minimum number of transpositions turning ``p`` into ``q`` (BFS; small n only)."""
    p, q = tuple(p), tuple(q)
    if sorted(p) != sorted(q):
        raise DomainMismatchError("permutations of different multisets")
    if p == q:
        return 0
    n = len(p)
    seen = {p}
    frontier = deque([(p, 0)])
    while frontier:
        cur, d = frontier.popleft()
        for i in range(n):
            for j in range(i + 1, n):
                if cur[i] == cur[j]:
                    continue
                nxt = list(cur)
                nxt[i], nxt[j] = nxt[j], nxt[i]
                nxt = tuple(nxt)
                if nxt == q:
                    return d + 1
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append((nxt, d + 1))
    raise AssertionError("unreachable: transposition graph is connected")
