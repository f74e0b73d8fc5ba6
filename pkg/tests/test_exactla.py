from fractions import Fraction

import pytest

from cartanforms import exactla as xl


def test_rref_and_rank():
    m = xl.mat([[1, 2, 3], [2, 4, 6], [0, 1, 1]])
    red, pivots = xl.rref(m)
    assert pivots == [0, 1]
    assert xl.rank(m) == 2


def test_nullspace_exact():
    m = xl.mat([[1, 2, 3], [2, 4, 6]])
    basis = xl.nullspace(m)
    assert len(basis) == 2
    for v in basis:
        for row in m:
            assert sum(a * b for a, b in zip(row, v)) == 0


def test_det_and_inverse():
    m = xl.mat([[2, 1], [7, 4]])
    assert xl.det(m) == 1
    inv = xl.inverse(m)
    assert xl.mat_mul(m, inv) == xl.identity(2)
    singular = xl.mat([[1, 2], [2, 4]])
    assert xl.det(singular) == 0
    with pytest.raises(ZeroDivisionError):
        xl.inverse(singular)


def test_solve():
    m = xl.mat([[2, 0], [1, 3]])
    x = xl.solve(m, [Fraction(4), Fraction(5)])
    assert x == [Fraction(2), Fraction(1)]


def test_in_span():
    vecs = [[Fraction(1), Fraction(0)], [Fraction(1), Fraction(1)]]
    assert xl.in_span(vecs, [Fraction(3), Fraction(2)])
    assert not xl.in_span([vecs[0]], [Fraction(0), Fraction(1)])


def test_inertia_diagonal_and_hyperbolic():
    assert xl.inertia(xl.mat([[2, 0], [0, -3]])) == (1, 1, 0)
    assert xl.inertia(xl.mat([[0, 1], [1, 0]])) == (1, 1, 0)
    assert xl.inertia(xl.mat([[0, 0], [0, 0]])) == (0, 0, 2)
    assert xl.inertia(xl.mat([[1, 0, 0], [0, 0, 2], [0, 2, 0]])) == (2, 1, 0)
