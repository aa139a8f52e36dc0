"""The potential ``g`` and the matrix map ``A``, evaluated at periodic points.

Every spec evaluates exactly at a periodic point: tables read the leading
coordinates of the periodic stream, run-length families count the leading
run of one symbol on the infinite periodic word. Entries are stored as
exact ``Fraction`` values and converted to mpmath numbers lazily at the
active precision, so the same spec can be reused across precisions.
"""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Callable, Mapping

import mpmath as mp

from .errors import ConfigError, NormalizationError
from .sft import PeriodicPoint, TransitionMatrix, admissible_words, periodic_points

INF = None  # run-length key used for the constant sequence s^inf


def to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, (int, str)):
        try:
            return Fraction(value.strip() if isinstance(value, str) else value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"not a decimal number: {value!r}") from exc
    if isinstance(value, float):
        return Fraction(repr(value))
    raise ConfigError(f"not a number: {value!r}")


def _mpf(x: Fraction):
    return mp.mpf(x.numerator) / x.denominator


def _exact_rows(rows) -> tuple:
    try:
        out = tuple(tuple(to_fraction(v) for v in row) for row in rows)
    except TypeError as exc:
        raise ConfigError(f"matrix must be a nested list, got {rows!r}") from exc
    d = len(out)
    if d == 0 or any(len(r) != d for r in out):
        raise ConfigError("matrices must be square and non-empty")
    return out


def _exact_det(rows) -> Fraction:
    # fraction-free Gaussian elimination on exact rationals
    a = [list(r) for r in rows]
    d = len(a)
    det = Fraction(1)
    for c in range(d):
        piv = next((r for r in range(c, d) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, d):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, d):
                    a[r][k] -= f * a[c][k]
    return det


def _to_mp_matrix(rows):
    return mp.matrix([[_mpf(v) for v in r] for r in rows])


def _fmt(x: Fraction) -> str:
    return str(x)


def _parse_key(key, q=None) -> tuple:
    if isinstance(key, tuple):
        return tuple(int(s) for s in key)
    if isinstance(key, str):
        if "," in key:
            return tuple(int(s) for s in key.split(","))
        return tuple(int(s) for s in key)
    raise ConfigError(f"bad word key {key!r}")


def _key_str(word) -> str:
    return ",".join(str(s) for s in word)


class _PrecisionMemo:
    """Per-precision cache of mpmath conversions."""

    def __init__(self):
        self._prec = None
        self._data = {}

    def get(self, key, make):
        if self._prec != mp.mp.prec:
            self._prec = mp.mp.prec
            self._data = {}
        try:
            return self._data[key]
        except KeyError:
            val = self._data[key] = make()
            return val

    def __getstate__(self):
        return {"prec": None}

    def __setstate__(self, state):
        self.__init__()


# ---------------------------------------------------------------- g-functions


class GFunction:
    """Base class for g-function specs."""

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()!r})"

    depth = 0

    def value(self, p: PeriodicPoint):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def check_normalized(self, T: TransitionMatrix, tol=None) -> None:
        """Raise NormalizationError unless preimage sums are 1.

        The check runs over every admissible context of length
        ``max(depth - 1, 1)``; ``tol`` defaults to ``10**(-dps/2)``.
        """
        if tol is None:
            tol = mp.mpf(10) ** (-(mp.mp.dps // 2))
        clen = max(self.depth - 1, 1)
        for ctx in admissible_words(T, clen):
            total = mp.mpf(0)
            for i in range(T.q):
                if not T.allowed(i, ctx[0]):
                    continue
                total += self._prefix_value((i,) + ctx)
            if abs(total - 1) > tol:
                raise NormalizationError(
                    f"g sums to {mp.nstr(total, 20)} over preimages of context {_key_str(ctx)}")

    def _prefix_value(self, prefix):
        raise NotImplementedError


class ConstantG(GFunction):
    value_: Fraction

    def __init__(self, value):
        self.value_ = to_fraction(value)
        if self.value_ <= 0:
            raise ConfigError("g must be strictly positive")

    def value(self, p):
        return _mpf(self.value_)

    def _prefix_value(self, prefix):
        return _mpf(self.value_)

    def describe(self):
        return {"type": "constant", "value": _fmt(self.value_)}


class TableG(GFunction):
    """``g`` depending on the first ``depth`` coordinates only."""

    depth: int
    values: Mapping

    def __init__(self, depth: int, values: Mapping):
        if depth < 1:
            raise ConfigError("table depth must be >= 1")
        vals = {}
        for k, v in values.items():
            key = _parse_key(k)
            if len(key) != depth:
                raise ConfigError(f"key {k!r} does not have length {depth}")
            vals[key] = to_fraction(v)
            if vals[key] <= 0:
                raise ConfigError(f"g must be strictly positive (key {k!r})")
        self.depth = depth
        self.values = vals

    def _prefix_value(self, prefix):
        key = tuple(prefix[: self.depth])
        try:
            return _mpf(self.values[key])
        except KeyError:
            raise ConfigError(f"g table has no entry for word {_key_str(key)}") from None

    def value(self, p):
        return self._prefix_value(p.prefix(self.depth))

    def describe(self):
        return {"type": "table", "depth": self.depth,
                "values": {_key_str(k): _fmt(v) for k, v in sorted(self.values.items())}}


class CallableG(GFunction):
    """``g`` given by ``func(point) -> positive number``.

    Normalization cannot be checked exhaustively for a callback, so
    ``check_normalized`` only samples periodic-point contexts of ``depth``.
    """

    def __init__(self, func: Callable, key: str = "", depth: int = 1):
        self.func, self.key, self.depth = func, key, depth

    def value(self, p):
        return mp.mpf(self.func(p))

    def _prefix_value(self, prefix):
        return self.value(PeriodicPoint(tuple(prefix), 0))

    def describe(self):
        return {"type": "callable", "key": self.key or getattr(self.func, "__qualname__", "?")}


def eval_g(g: GFunction, p: PeriodicPoint):
    v = g.value(p)
    if not v > 0:
        raise ConfigError(f"g is not positive at {p}")
    return v


def birkhoff_sum_log_g(g: GFunction, p: PeriodicPoint, steps: int | None = None):
    """``sum_{k<steps} log g(sigma**k x)``; ``steps`` defaults to the period."""
    n = p.period if steps is None else steps
    total = mp.mpf(0)
    for k in range(n):
        v = g.value(p.shift(k))
        if not v > 0:
            raise ValueError(f"g is not positive at {p.shift(k)}")
        total += mp.log(v)
    return total


# ---------------------------------------------------------------- cocycles


class Cocycle:
    dim: int

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()!r})"

    def matrix(self, p: PeriodicPoint):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class ConstantCocycle(Cocycle):
    rows: tuple

    def __init__(self, matrix):
        rows = _exact_rows(matrix)
        if _exact_det(rows) == 0:
            raise ConfigError("cocycle matrix is singular")
        self.rows = rows
        self._memo = _PrecisionMemo()

    @property
    def dim(self):
        return len(self.rows)

    def matrix(self, p):
        return self._memo.get(0, lambda: _to_mp_matrix(self.rows))

    def describe(self):
        return {"type": "constant", "matrix": [[_fmt(v) for v in r] for r in self.rows]}


class TableCocycle(Cocycle):
    depth: int
    values: Mapping

    def __init__(self, depth: int, values: Mapping):
        if depth < 1:
            raise ConfigError("table depth must be >= 1")
        vals = {}
        for k, m in values.items():
            key = _parse_key(k)
            if len(key) != depth:
                raise ConfigError(f"key {k!r} does not have length {depth}")
            vals[key] = _exact_rows(m)
            if _exact_det(vals[key]) == 0:
                raise ConfigError(f"cocycle matrix for {k!r} is singular")
        dims = {len(m) for m in vals.values()}
        if len(dims) != 1:
            raise ConfigError("cocycle matrices have inconsistent dimensions")
        self.depth = depth
        self.values = vals
        self._memo = _PrecisionMemo()

    @property
    def dim(self):
        return len(next(iter(self.values.values())))

    def matrix(self, p):
        key = p.prefix(self.depth)
        if key not in self.values:
            raise ConfigError(f"cocycle table has no entry for word {_key_str(key)}")
        return self._memo.get(key, lambda: _to_mp_matrix(self.values[key]))

    def describe(self):
        return {"type": "table", "depth": self.depth,
                "values": {_key_str(k): [[_fmt(v) for v in r] for r in m]
                           for k, m in sorted(self.values.items())}}


def run_length(p: PeriodicPoint, symbol: int):
    """Leading occurrences of ``symbol`` on the periodic stream, ``INF`` for ``s^inf``."""
    if all(s == symbol for s in p.word):
        return INF
    m = 0
    while p.coordinate(m) == symbol:
        m += 1
    return m


class RunLengthCocycle(Cocycle):
    """``A(x) = family[m]`` where ``x = s^m t ...`` with ``t != s``.

    ``family`` is either a mapping ``{0: M0, 1: M1, ..., INF: Minf}`` (run
    lengths past the largest listed key use ``Minf``) or a module-level
    function ``m -> rows`` with ``m = None`` meaning infinity. ``name`` labels
    formula families for serialization. ``allow_singular`` skips the
    invertibility check (the trace formula only needs a dominant eigenvalue).
    """

    symbol: int
    family: object
    name: str = ""

    def __init__(self, symbol: int, family, name: str = "", allow_singular: bool = False):
        if callable(family):
            fam = family
        else:
            fam = {}
            for k, m in family.items():
                key = INF if k in (None, "inf", "∞") else int(k)
                if key is not INF and key < 0:
                    raise ConfigError("run lengths are non-negative")
                fam[key] = _exact_rows(m)
            if INF not in fam:
                raise ConfigError("run_length family needs an 'inf' entry")
        self.symbol = int(symbol)
        self.family = fam
        self.name = name
        self._memo = _PrecisionMemo()
        keys = [INF, *range(31)] if callable(fam) else list(fam)
        dims = set()
        for k in keys:
            rows = self.rows(k)
            dims.add(len(rows))
            if not allow_singular and _exact_det(rows) == 0:
                raise ConfigError(f"cocycle matrix for run length {k} is singular")
        if len(dims) != 1:
            raise ConfigError("cocycle matrices have inconsistent dimensions")

    def rows(self, m):
        if callable(self.family):
            return _exact_rows(self.family(m))
        if m is not INF and m not in self.family:
            finite = [k for k in self.family if k is not INF]
            if not finite or m > max(finite):
                m = INF
            else:
                raise ConfigError(f"run_length family has no entry for m={m}")
        return self.family[m]

    @property
    def dim(self):
        return len(self.rows(INF))

    def family_matrix(self, m):
        return self._memo.get(("m", m), lambda: _to_mp_matrix(self.rows(m)))

    def matrix(self, p):
        return self.family_matrix(run_length(p, self.symbol))

    def tail_gap(self, m: int = 30):
        """Max entry difference between ``family[m]`` and ``family[inf]``."""
        a, b = self.family_matrix(m), self.family_matrix(INF)
        return max(abs(a[i, j] - b[i, j]) for i in range(a.rows) for j in range(a.cols))

    def describe(self):
        if callable(self.family):
            return {"type": "run_length", "symbol": self.symbol,
                    "builtin": self.name or self.family.__qualname__}
        fam = {("inf" if k is INF else str(k)): [[_fmt(v) for v in r] for r in m]
               for k, m in self.family.items()}
        return {"type": "run_length", "symbol": self.symbol,
                "family": dict(sorted(fam.items()))}


class CallableCocycle(Cocycle):
    """``A`` given by ``func(point) -> square nested list / mp.matrix``."""

    def __init__(self, func: Callable, dim: int, key: str = ""):
        self.func, self.dim, self.key = func, dim, key

    def matrix(self, p):
        return mp.matrix(self.func(p))

    def describe(self):
        return {"type": "callable", "dim": self.dim,
                "key": self.key or getattr(self.func, "__qualname__", "?")}


def eval_A(c: Cocycle, p: PeriodicPoint):
    return c.matrix(p)


def cocycle_product(c: Cocycle, p: PeriodicPoint, steps: int | None = None):
    """``A(sigma^{n-1} x) ... A(sigma x) A(x)`` with ``n`` = period by default."""
    n = p.period if steps is None else steps
    P = c.matrix(p)
    for k in range(1, n):
        P = c.matrix(p.shift(k)) * P
    return P


# ---------------------------------------------------------------- diagnostics


def _spec_features(spec, p):
    if isinstance(spec, GFunction):
        return [mp.log(eval_g(spec, p))]
    a = eval_A(spec, p)
    return [a[i, j] for i in range(a.rows) for j in range(a.cols)]


def variation_estimate(spec, T: TransitionMatrix, n: int, extra: int = 4,
                       samples: int = 4096, seed: int = 0):
    """Observed lower bound on ``var_n`` over periodic points.

    Candidates are all periodic points (every rotation) of period up to
    ``n + extra``; points are grouped by their first ``n`` coordinates and
    the largest in-group spread of ``log g`` (or of the matrix entries) is
    returned. If there are more than ``samples`` candidates a seeded random
    subset is used.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    points = []
    for per in range(1, n + extra + 1):
        for p in periodic_points(T, per):
            points.extend(p.shift(k) for k in range(per))
    if len(points) > samples:
        points = random.Random(seed).sample(points, samples)
    groups: dict = {}
    for p in points:
        groups.setdefault(p.prefix(n), []).append(p)
    best = mp.mpf(0)
    for members in groups.values():
        # max over pairs of the max-entry difference = max over entries of (max - min)
        feats = [_spec_features(spec, p) for p in members]
        for column in zip(*feats):
            spread = max(column) - min(column)
            if spread > best:
                best = spread
    return best


# ---------------------------------------------------------------- built-in systems


def _paper_family_literal(m):
    if m is INF:
        return [[2, 1], [1, 1]]
    return [[2, 1 + Fraction(1, 2 ** (m ** 3))], [1 + Fraction(1, 3 ** (m ** 3)), 1]]


def _paper_family_floor(m):
    # integer-truncated off-diagonal corrections: 1 // 2**(m**3) is 1 at m=0, else 0
    if m is INF:
        return [[2, 1], [1, 1]]
    return [[2, 1 + 1 // 2 ** (m ** 3)], [1 + 1 // 3 ** (m ** 3), 1]]


BUILTIN_FAMILIES = {
    "paper-example": _paper_family_floor,
    "paper-example-literal": _paper_family_literal,
}


def builtin_cocycle(name: str) -> RunLengthCocycle:
    try:
        fam = BUILTIN_FAMILIES[name]
    except KeyError:
        raise ConfigError(f"unknown built-in cocycle {name!r}") from None
    # the literal family is rank one at m=1: 2*1 - (3/2)(4/3) = 0
    return RunLengthCocycle(0, fam, name=name, allow_singular=name == "paper-example-literal")


def paper_example(literal: bool = False):
    """The two-symbol example system: full 2-shift, ``g = 1/2``.

    ``literal=False`` gives the cocycle whose periodic data generates the
    reference table: ``[[2, 2], [2, 1]]`` when ``x_0 = 1`` and ``[[2, 1],
    [1, 1]]`` otherwise (the closed form with the ``2**(-m**3)`` and
    ``3**(-m**3)`` corrections truncated to integers). ``literal=True``
    keeps the corrections exactly.
    """
    name = "paper-example-literal" if literal else "paper-example"
    return TransitionMatrix.full(2), ConstantG(Fraction(1, 2)), builtin_cocycle(name)
