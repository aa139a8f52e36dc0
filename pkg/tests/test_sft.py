import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lyapdet.errors import ConfigError, ReducibleShiftError
from lyapdet.sft import (
    PeriodicPoint,
    TransitionMatrix,
    admissible_words,
    count_periodic,
    count_words,
    cylinder_point,
    is_admissible,
    is_irreducible,
    periodic_points,
    topological_entropy,
)

FULL2 = TransitionMatrix.full(2)
GOLDEN = TransitionMatrix(((1, 1), (1, 0)))


def brute_words(T, m):
    return [w for w in itertools.product(range(T.q), repeat=m)
            if all(T.entries[a][b] for a, b in zip(w, w[1:]))]


@st.composite
def transition_matrices(draw, max_q=4):
    q = draw(st.integers(1, max_q))
    rows = [[draw(st.integers(0, 1)) for _ in range(q)] for _ in range(q)]
    for i in range(q):  # no dead symbols
        rows[i][(i + 1) % q] = 1
    return TransitionMatrix(rows)


def test_full_shift_words():
    assert len(admissible_words(FULL2, 3)) == 8
    assert admissible_words(FULL2, 1) == [(0,), (1,)]


def test_golden_mean_words():
    assert admissible_words(GOLDEN, 2) == [(0, 0), (0, 1), (1, 0)]


def test_periodic_points_examples():
    assert len(periodic_points(FULL2, 3)) == 8
    assert [p.word for p in periodic_points(GOLDEN, 3)] == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)]
    assert periodic_points(FULL2, 1) == [PeriodicPoint((0,), 0), PeriodicPoint((1,), 0)]


@settings(max_examples=40, deadline=None)
@given(transition_matrices(), st.integers(1, 6))
def test_word_counts_match_brute_force(T, m):
    words = admissible_words(T, m)
    assert words == brute_words(T, m)
    assert len(words) == count_words(T, m)


@settings(max_examples=40, deadline=None)
@given(transition_matrices(), st.integers(1, 7))
def test_periodic_points_are_cyclic_and_counted_by_trace(T, n):
    pts = periodic_points(T, n)
    for p in pts:
        w = p.word
        assert all(T.entries[w[k]][w[(k + 1) % n]] for k in range(n))
    A = np.array(T.entries, dtype=object)
    assert len(pts) == np.trace(np.linalg.matrix_power(A, n)) == count_periodic(T, n)


def test_counts_up_to_12():
    for T in (FULL2, GOLDEN, TransitionMatrix(((1, 1, 0), (0, 1, 1), (1, 0, 1)))):
        A = np.array(T.entries, dtype=object)
        for n in range(1, 13):
            assert len(periodic_points(T, n)) == np.trace(np.linalg.matrix_power(A, n))
            assert len(admissible_words(T, n)) == np.linalg.matrix_power(A, n - 1).sum()


def test_irreducibility():
    assert is_irreducible(FULL2)
    assert not is_irreducible(TransitionMatrix(((1, 0), (0, 1))))
    assert is_irreducible(GOLDEN)
    assert is_irreducible(TransitionMatrix(((0, 1), (1, 0))))


def test_rejects_dead_symbols():
    with pytest.raises(ConfigError):
        TransitionMatrix(((1, 0), (1, 0)))
    with pytest.raises(ConfigError):
        TransitionMatrix(((1, 2), (1, 1)))


def test_entropy_examples():
    assert abs(topological_entropy(FULL2) - mp.log(2)) < mp.mpf(10) ** -54
    golden = (1 + mp.sqrt(5)) / 2
    assert abs(topological_entropy(GOLDEN) - mp.log(golden)) < mp.mpf(10) ** -54
    assert topological_entropy(TransitionMatrix(((1,),))) == 0


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_entropy_full_shift(q):
    assert abs(topological_entropy(TransitionMatrix.full(q)) - mp.log(q)) < mp.mpf(10) ** -54


def test_entropy_periodic_matrix_converges():
    # period-2 irreducible matrix: plain power iteration on T would oscillate
    assert abs(topological_entropy(TransitionMatrix(((0, 1), (1, 0))))) < mp.mpf(10) ** -54


def test_entropy_matches_float_eigenvalue():
    T = TransitionMatrix(((1, 1, 0), (0, 0, 1), (1, 1, 1)))
    ref = math.log(max(abs(np.linalg.eigvals(np.array(T.entries, float)))))
    assert abs(float(topological_entropy(T)) - ref) < 1e-12


def test_entropy_rejects_reducible():
    with pytest.raises(ReducibleShiftError):
        topological_entropy(TransitionMatrix(((1, 0), (0, 1))))


def test_cylinder_point_closes_up_word():
    p = cylinder_point(GOLDEN, (1, 0, 1))
    assert p.word[:3] == (1, 0, 1)
    assert GOLDEN.is_cyclic(p.word)
    assert cylinder_point(FULL2, (0, 1)).word == (0, 1)


def test_periodic_point_coordinates():
    p = PeriodicPoint((0, 1, 1), 1)
    assert p.prefix(5) == (1, 1, 0, 1, 1)
    assert p.shift(2) == PeriodicPoint((0, 1, 1), 0)
    assert is_admissible(GOLDEN, (0, 1, 0)) and not is_admissible(GOLDEN, (1, 1))
