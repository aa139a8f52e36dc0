"""Periodic-orbit traces of the transfer operator and the cylinder baseline.

For a period-``n`` point ``x`` with product ``B = A^(n)(x)`` the trace formula
contributes

    exp(S_n log g(x)) * lambda_1(B)**(d-1) * rho(B)**beta / p_B'(lambda_1(B))

to ``tr L_beta^n``. Only ``rho**beta`` depends on ``beta``, so each orbit is
reduced once to a ``(weight, log rho)`` pair and every beta-dependent
quantity is an ordered sum over those pairs.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import mpmath as mp
from filelock import FileLock

from .cocycle import birkhoff_sum_log_g, cocycle_product
from .errors import NotDominated
from .matrix import charpoly_derivative_at, entrywise_norm, leading_eigenvalue
from .sft import admissible_words, cylinder_point, periodic_points

log = logging.getLogger(__name__)

NORM_KINDS = ("two", "one", "inf")


def system_fingerprint(T, g, c, digits: int | None = None) -> str:
    """Stable hash of the transition matrix, both specs and the precision."""
    payload = {
        "transitions": T.as_lists(),
        "g": g.describe(),
        "cocycle": c.describe(),
        "precision_digits": mp.mp.dps if digits is None else digits,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:20]


def orbit_term(g, c, p):
    """``(weight, log rho)`` of one periodic point."""
    B = cocycle_product(c, p)
    try:
        lam, _ = leading_eigenvalue(B)
    except NotDominated as exc:
        raise NotDominated("cocycle product is not dominated", word=p.word) from exc
    d = B.rows
    weight = mp.exp(birkhoff_sum_log_g(g, p)) * lam ** (d - 1) / charpoly_derivative_at(B, lam)
    return weight, mp.log(abs(lam))


def _terms_chunk(args):
    g, c, points, dps = args
    with mp.workdps(dps):
        return [orbit_term(g, c, p) for p in points]


def orbit_terms(T, g, c, n: int, executor=None, chunk_size: int = 256):
    """``(weight, log rho)`` for every point of ``Per_n``, lexicographic order.

    With an ``executor`` the points are split into contiguous lexicographic
    chunks; ``executor.map`` returns them in order, so the list is the same
    as the serial one.
    """
    points = periodic_points(T, n)
    if executor is None or len(points) <= chunk_size:
        return [orbit_term(g, c, p) for p in points]
    chunks = [points[i:i + chunk_size] for i in range(0, len(points), chunk_size)]
    out = []
    for part in executor.map(_terms_chunk, [(g, c, ch, mp.mp.dps) for ch in chunks]):
        out.extend(part)
    return out


def _sum_terms(terms, beta=None):
    # strictly left-to-right: the reduction order is part of the reproducibility contract
    t = mp.mpf(0)
    dt = mp.mpf(0)
    for w, lr in terms:
        if beta is None:
            t += w
            dt += w * lr
        else:
            t += w * mp.exp(beta * lr)
    return t if beta is not None else (t, dt)


def trace_pair(T, g, c, n: int, executor=None):
    """``(tr L_0^n, d/dbeta tr L_beta^n at 0)``."""
    return _sum_terms(orbit_terms(T, g, c, n, executor))


def trace_general_beta(T, g, c, n: int, beta, executor=None):
    beta = mp.mpf(beta)
    if beta == 0:
        return trace_pair(T, g, c, n, executor)[0]
    return _sum_terms(orbit_terms(T, g, c, n, executor), beta)


def naive_estimates(T, g, c, n: int, kinds=NORM_KINDS):
    """Cylinder baseline ``(1/n) sum_I exp(S_n log g(x_I)) log||A^(n)(x_I)||``.

    ``x_I`` is the periodic extension ``I^inf`` (closed up by a connecting
    path when ``I`` is not cyclically admissible). Returns ``{kind: value}``.
    """
    sums = {k: mp.mpf(0) for k in kinds}
    for word in admissible_words(T, n):
        x = cylinder_point(T, word)
        weight = mp.exp(birkhoff_sum_log_g(g, x, steps=n))
        B = cocycle_product(c, x, steps=n)
        for k in kinds:
            sums[k] += weight * mp.log(entrywise_norm(B, k))
    return {k: v / n for k, v in sums.items()}


def naive_estimate(T, g, c, n: int, kind: str = "two"):
    return naive_estimates(T, g, c, n, (kind,))[kind]


@dataclass
class TraceSequence:
    """Dense traces for ``n = 1..n_max``; index 0 of ``t`` and ``dt`` is unused."""

    n_max: int
    t: list
    dt: list
    fingerprint: str
    computed: list = field(default_factory=list)  # periods evaluated from orbits, not cache


class TraceCache:
    """On-disk cache: ``<root>/<fingerprint>/trace_<n>.txt`` with ``t=`` / ``dt=`` lines."""

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, fingerprint, n):
        return self.root / fingerprint / f"trace_{n}.txt"

    def _lock(self):
        self.root.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.root / ".lock"))

    def read(self, fingerprint: str, n: int):
        path = self._path(fingerprint, n)
        if not path.exists():
            return None
        try:
            fields = dict(line.split("=", 1) for line in path.read_text().split())
            return mp.mpf(fields["t"]), mp.mpf(fields["dt"])
        except (ValueError, KeyError) as exc:
            log.warning("ignoring corrupt cache entry %s (%s); recomputing", path, exc)
            return None

    def write(self, fingerprint: str, n: int, t, dt) -> None:
        digits = mp.libmp.libmpf.repr_dps(mp.mp.prec)
        text = f"t={mp.nstr(t, digits, strip_zeros=False)}\ndt={mp.nstr(dt, digits, strip_zeros=False)}\n"
        path = self._path(fingerprint, n)
        with self._lock():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(text)
            os.replace(tmp, path)


def compute_traces(T, g, c, n_max: int, cache: TraceCache | None = None,
                   executor=None) -> TraceSequence:
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    fp = system_fingerprint(T, g, c)
    t, dt, computed = [None], [None], []
    for n in range(1, n_max + 1):
        hit = cache.read(fp, n) if cache is not None else None
        if hit is None:
            hit = trace_pair(T, g, c, n, executor)
            computed.append(n)
            if cache is not None:
                cache.write(fp, n, *hit)
        t.append(hit[0])
        dt.append(hit[1])
    return TraceSequence(n_max, t, dt, fp, computed)
