"""Combinatorics of one-sided subshifts of finite type.

Words are plain tuples of ints. A periodic point is stored as the repeating
block together with a rotation index, so ``PeriodicPoint((0, 1), 1)`` is the
sequence ``1010...``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import mpmath as mp

from .errors import ConfigError, ReducibleShiftError

Word = tuple


@dataclass(frozen=True)
class TransitionMatrix:
    """0/1 transition matrix of a shift of finite type."""

    entries: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.entries)
        q = len(rows)
        if q == 0 or any(len(r) != q for r in rows):
            raise ConfigError("transition matrix must be square and non-empty")
        if any(v not in (0, 1) for r in rows for v in r):
            raise ConfigError("transition matrix entries must be 0 or 1")
        for i in range(q):
            if not any(rows[i]):
                raise ConfigError(f"symbol {i} has no outgoing transition")
            if not any(rows[j][i] for j in range(q)):
                raise ConfigError(f"symbol {i} has no incoming transition")
        object.__setattr__(self, "entries", rows)

    @classmethod
    def full(cls, q: int) -> "TransitionMatrix":
        return cls(tuple((1,) * q for _ in range(q)))

    @property
    def q(self) -> int:
        return len(self.entries)

    def allowed(self, i: int, j: int) -> bool:
        return self.entries[i][j] == 1

    def power(self, n: int) -> list[list[int]]:
        """Exact integer power ``T**n``."""
        q = self.q
        result = [[int(i == j) for j in range(q)] for i in range(q)]
        base = [list(r) for r in self.entries]
        while n:
            if n & 1:
                result = _int_matmul(result, base)
            base = _int_matmul(base, base)
            n >>= 1
        return result

    def is_cyclic(self, word: Sequence[int]) -> bool:
        return is_admissible(self, word) and self.allowed(word[-1], word[0])

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.entries]


def _int_matmul(a, b):
    q = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(q)) for j in range(q)] for i in range(q)]


class PeriodicPoint(NamedTuple):
    """The point ``sigma**rotation (word word word ...)``."""

    word: Word
    rotation: int = 0

    @property
    def period(self) -> int:
        return len(self.word)

    def coordinate(self, k: int) -> int:
        return self.word[(self.rotation + k) % len(self.word)]

    def prefix(self, m: int) -> Word:
        return tuple(self.coordinate(k) for k in range(m))

    def shift(self, k: int = 1) -> "PeriodicPoint":
        return PeriodicPoint(self.word, (self.rotation + k) % len(self.word))


def is_admissible(T: TransitionMatrix, word: Sequence[int]) -> bool:
    if any(not 0 <= s < T.q for s in word):
        return False
    return all(T.allowed(a, b) for a, b in zip(word, word[1:]))


def admissible_words(T: TransitionMatrix, m: int) -> list[Word]:
    """All admissible words of length ``m`` in lexicographic order."""
    if m < 1:
        raise ValueError("word length must be >= 1")
    words = [(s,) for s in range(T.q)]
    for _ in range(m - 1):
        words = [w + (j,) for w in words for j in range(T.q) if T.allowed(w[-1], j)]
    return words


def periodic_points(T: TransitionMatrix, n: int) -> list[PeriodicPoint]:
    """Fixed points of ``sigma**n`` (rotation 0), lexicographic by block.

    Points of smaller period are included, so the count is ``tr(T**n)``.
    """
    if n < 1:
        raise ValueError("period must be >= 1")
    return [PeriodicPoint(w, 0) for w in admissible_words(T, n) if T.allowed(w[-1], w[0])]


def count_words(T: TransitionMatrix, m: int) -> int:
    if m == 1:
        return T.q
    return sum(map(sum, T.power(m - 1)))


def count_periodic(T: TransitionMatrix, n: int) -> int:
    P = T.power(n)
    return sum(P[i][i] for i in range(T.q))


def is_irreducible(T: TransitionMatrix) -> bool:
    q = T.q
    M = [[int(i == j) | T.entries[i][j] for j in range(q)] for i in range(q)]
    P = [[int(i == j) for j in range(q)] for i in range(q)]
    for _ in range(q - 1):
        P = _int_matmul(P, M)
    return all(v > 0 for row in P for v in row)


def connecting_path(T: TransitionMatrix, a: int, b: int) -> Word:
    """Shortest (lexicographically least) symbols ``p`` with ``a p b`` admissible."""
    if T.allowed(a, b):
        return ()
    prev = {}
    queue = deque()
    for j in range(T.q):
        if T.allowed(a, j) and j not in prev:
            prev[j] = None
            queue.append(j)
    while queue:
        s = queue.popleft()
        if T.allowed(s, b):
            path = [s]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return tuple(reversed(path))
        for j in range(T.q):
            if T.allowed(s, j) and j not in prev:
                prev[j] = s
                queue.append(j)
    raise ReducibleShiftError(f"no path from symbol {a} back to symbol {b}")


def cylinder_point(T: TransitionMatrix, word: Sequence[int]) -> PeriodicPoint:
    """A periodic point in the cylinder ``[word]``.

    This is ``word**inf`` when the word is cyclically admissible, otherwise
    the word is closed up by the shortest connecting path.
    """
    word = tuple(word)
    return PeriodicPoint(word + connecting_path(T, word[-1], word[0]), 0)


def topological_entropy(T: TransitionMatrix):
    """``log`` of the Perron root of ``T`` at the current mpmath precision.

    Iterates on ``I + T`` (primitive whenever ``T`` is irreducible) and stops
    when the Collatz-Wielandt bounds agree to ``10**(8 - dps)``.
    """
    if not is_irreducible(T):
        raise ReducibleShiftError("topological entropy is only supported for irreducible T")
    q = T.q
    B = [[mp.mpf(int(i == j) + T.entries[i][j]) for j in range(q)] for i in range(q)]
    tol = mp.mpf(10) ** (8 - mp.mp.dps)
    v = [mp.mpf(1)] * q
    for _ in range(100000):
        w = [mp.fsum(B[i][k] * v[k] for k in range(q)) for i in range(q)]
        ratios = [w[i] / v[i] for i in range(q)]
        lo, hi = min(ratios), max(ratios)
        if hi - lo <= tol * hi:
            rho = (lo + hi) / 2
            return mp.log(rho - 1) if rho > 1 else mp.mpf(0)
        top = max(w)
        v = [x / top for x in w]
    raise ArithmeticError("power iteration did not converge")
