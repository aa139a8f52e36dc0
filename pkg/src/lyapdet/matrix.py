"""Extended-precision small-matrix kernel (mpmath matrices).

The leading eigenvalue and the characteristic polynomial ``p(x) = det(xI - A)``
are what the trace formula needs; everything here works at the ambient
mpmath precision, which callers fix with :class:`PrecisionContext`.
"""
from __future__ import annotations

import os
import random
from dataclasses import dataclass

import mpmath as mp

from .errors import NotDominated

DEFAULT_DIGITS = 64


@dataclass
class PrecisionContext:
    """Working decimal precision for a run.

    Use as a context manager::

        with PrecisionContext(80):
            ...
    """

    digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if self.digits < 30:
            raise ValueError("precision must be at least 30 decimal digits")

    @classmethod
    def from_env(cls, default: int = DEFAULT_DIGITS) -> "PrecisionContext":
        value = os.environ.get("LYAP_PRECISION")
        return cls(int(value) if value else default)

    @property
    def reported_digits(self) -> int:
        return self.digits - 10

    def __enter__(self):
        self._saved = mp.mp.dps
        mp.mp.dps = self.digits
        return self

    def __exit__(self, *exc):
        mp.mp.dps = self._saved
        return False


def as_matrix(rows):
    return mp.matrix([[mp.mpf(v) if not isinstance(v, mp.mpf) else v for v in r] for r in rows])


def charpoly(A):
    """Coefficients of ``det(xI - A)``, highest degree first (Faddeev-LeVerrier)."""
    d = A.rows
    coeffs = [mp.mpf(1)]
    M = mp.zeros(d, d)
    I = mp.eye(d)
    c = mp.mpf(1)
    for k in range(1, d + 1):
        M = A * M + c * I
        AM = A * M
        c = -sum(AM[i, i] for i in range(d)) / k
        coeffs.append(c)
    return coeffs


def _polyder(coeffs):
    d = len(coeffs) - 1
    return [coeffs[i] * (d - i) for i in range(d)]


def charpoly_derivative_at(A, lam):
    """``p'(lam)`` for ``p(x) = det(xI - A)``."""
    d = A.rows
    if d == 1:
        return mp.mpf(1)
    if d == 2:
        return 2 * lam - (A[0, 0] + A[1, 1])
    return mp.polyval(_polyder(charpoly(A)), lam)


def _not_dominated_threshold(lam1):
    return mp.mpf(10) ** (-(mp.mp.dps // 2)) * abs(lam1)


def eigenvalues(A):
    """All eigenvalues as roots of the characteristic polynomial (may be complex)."""
    d = A.rows
    if d == 1:
        return [A[0, 0]]
    if d == 2:
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = tr * tr - 4 * det
        if disc >= 0:
            s = mp.sqrt(disc)
            big = (tr + s) / 2 if tr >= 0 else (tr - s) / 2
            small = det / big if big != 0 else (tr - s) / 2
            return [big, small]
        s = mp.sqrt(-disc)
        return [mp.mpc(tr / 2, s / 2), mp.mpc(tr / 2, -s / 2)]
    roots = mp.polyroots(charpoly(A), maxsteps=200, extraprec=2 * mp.mp.prec)
    return sorted(roots, key=lambda z: -abs(z))


def leading_eigenvalue(A):
    """Return ``(lambda_1, gap)`` with ``gap = |lambda_1| - max_{j>=2} |lambda_j|``.

    Raises NotDominated when the top eigenvalue is not real and simple in
    modulus, with a relative tolerance of half the working digits.
    """
    d = A.rows
    if d == 1:
        lam = A[0, 0]
        return lam, abs(lam)
    eig = eigenvalues(A)
    lam, rest = eig[0], eig[1:]
    if isinstance(lam, mp.mpc):
        if abs(lam.imag) > _not_dominated_threshold(lam):
            raise NotDominated("leading eigenvalue is not real")
        lam = lam.real
    if d > 2:
        # polish on p(x) = det(xI - A) so the root is good to working precision
        p = charpoly(A)
        dp = _polyder(p)
        for _ in range(50):
            step = mp.polyval(p, lam) / mp.polyval(dp, lam)
            lam -= step
            if abs(step) <= mp.eps * abs(lam):
                break
    gap = abs(lam) - max(abs(z) for z in rest)
    if gap <= _not_dominated_threshold(lam):
        raise NotDominated(f"no spectral gap (gap={mp.nstr(gap, 5)})")
    return lam, gap


def spectral_radius(A):
    lam, _ = leading_eigenvalue(A)
    return abs(lam)


def entrywise_norm(A, kind: str = "two"):
    """Vectorised norm of the entries: ``one`` (sum), ``two`` (Frobenius), ``inf`` (max)."""
    entries = [abs(A[i, j]) for i in range(A.rows) for j in range(A.cols)]
    if kind == "one":
        return mp.fsum(entries)
    if kind == "two":
        return mp.sqrt(mp.fsum(e * e for e in entries))
    if kind == "inf":
        return max(entries)
    raise ValueError(f"unknown norm kind {kind!r}")


def singular_values(A):
    """Singular values in decreasing order, from the eigenvalues of ``A^T A``."""
    G = A.T * A
    if G.rows == 1:
        return [mp.sqrt(G[0, 0])]
    if G.rows == 2:
        tr = G[0, 0] + G[1, 1]
        det = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
        s = mp.sqrt(max(tr * tr - 4 * det, 0))
        big = (tr + s) / 2
        small = det / big
        return [mp.sqrt(big), mp.sqrt(max(small, 0))]
    ev = mp.eigsy(G, eigvals_only=True)
    return sorted((mp.sqrt(max(e, 0)) for e in ev), reverse=True)


def singular_ratio(A):
    s = singular_values(A)
    return s[1] / s[0] if len(s) > 1 else mp.mpf(0)


def domination_diagnostic(c, T, n: int, samples: int = 4096, seed: int = 0):
    """Largest observed ``sigma_2 / sigma_1`` of cocycle products, per length.

    For each length ``k = 1..n`` the products ``A^(k)(x_I)`` are evaluated at
    the periodic cylinder points ``x_I`` of every admissible word ``I`` of
    length ``k`` (a seeded random subset when there are more than
    ``samples``). Returns ``[(k, ratio), ...]``. A ratio of 1 means the
    products have no gap at that length.
    """
    from .cocycle import cocycle_product
    from .sft import admissible_words, cylinder_point

    out = []
    rng = random.Random(seed)
    for k in range(1, n + 1):
        words = admissible_words(T, k)
        if len(words) > samples:
            words = rng.sample(words, samples)
        worst = mp.mpf(0)
        for w in words:
            r = singular_ratio(cocycle_product(c, cylinder_point(T, w), steps=k))
            if r > worst:
                worst = r
        out.append((k, worst))
    return out
