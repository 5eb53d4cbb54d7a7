import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rcess.errors import ParameterError, SingularSystemError
from rcess.field import Field, is_prime, next_prime

F5 = Field(5)
F7 = Field(7)


def test_scalar_examples():
    assert F5.mul(4, 4) == 1
    assert F5.inv(3) == 2
    assert F5.add(3, 4) == 2
    assert F5.sub(1, 3) == 3
    assert F5.neg(2) == 3
    assert F5.div(1, 3) == 2


def test_inverse_of_zero():
    with pytest.raises(ZeroDivisionError, match="division by zero in field"):
        F5.inv(0)


@pytest.mark.parametrize("q", [0, 1, 2, 4, 9, 15, 2**31 + 11])
def test_bad_modulus(q):
    with pytest.raises(ParameterError):
        Field(q)


def test_primality_against_sieve():
    limit = 2000
    sieve = np.ones(limit, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    assert [is_prime(x) for x in range(limit)] == sieve.tolist()
    assert next_prime(258) == 263
    assert is_prime(2**31 - 1)


@pytest.mark.parametrize("q", [3, 5, 7, 11, 13, 257])
def test_inverse_exhaustive(q):
    F = Field(q)
    for a in range(1, q):
        assert F.mul(a, F.inv(a)) == 1


@given(st.integers(1, 2**31 - 2))
def test_inverse_sampled_large(a):
    F = Field(2**31 - 1)
    assert F.mul(a, F.inv(a)) == 1


def test_vandermonde_rows():
    V = F5.vandermonde((1, 2, 3, 4), 3)
    assert V[1].tolist() == [1, 2, 4]
    assert F5.vandermonde([1], 1).tolist() == [[1]]
    V4 = F5.vandermonde((1, 2, 3, 4), 4)
    # 3^c mod 5 by direct powering
    assert V4[2].tolist() == [pow(3, c, 5) for c in range(4)] == [1, 3, 4, 2]


@pytest.mark.parametrize("pts", [(1, 1), (0, 2), (5, 1)])
def test_vandermonde_rejects(pts):
    with pytest.raises(ParameterError):
        F5.vandermonde(pts, 2)


def test_solve_examples():
    b = np.array([[4, 1], [2, 2], [0, 3]])
    assert np.array_equal(F5.solve_linear(np.eye(3, dtype=np.int64), b), b)
    A = F5.vandermonde((1, 2), 2)
    x = F5.solve_linear(A, np.array([[3], [0]]))
    brute = [c for c in itertools.product(range(5), repeat=2)
             if (c[0] + c[1]) % 5 == 3 and (c[0] + 2 * c[1]) % 5 == 0]
    assert brute == [(1, 2)]
    assert x.ravel().tolist() == [1, 2]


def test_singular():
    with pytest.raises(SingularSystemError, match="singular system"):
        F5.solve_linear(np.array([[1, 2], [1, 2]]), np.array([1, 1]))


def test_dot():
    assert F5.dot((1, 2, 3), (4, 0, 1)) == 2
    assert F5.dot((1, 2, 3), (0, 0, 0)) == 0
    assert F7.dot((1, 1, 1, 1), (1, 2, 3, 4)) == 3
    with pytest.raises(ParameterError):
        F5.dot((1, 2), (1, 2, 3))


def test_rank_examples():
    assert F5.rank(np.eye(4, dtype=np.int64)) == 4
    assert F5.rank(np.zeros((3, 3), dtype=np.int64)) == 0
    V = F5.vandermonde((1, 2, 3), 3)
    det = round(np.linalg.det(V.astype(float))) % 5
    assert det != 0
    assert F5.rank(V) == 3


@pytest.mark.parametrize("q", [5, 7, 11, 13])
def test_vandermonde_square_blocks_full_rank(q):
    F = Field(q)
    m = min(8, q - 1)
    pts = list(range(1, m + 1))
    for s in range(1, m + 1):
        for rows in itertools.combinations(pts, s):
            assert F.rank(F.vandermonde(rows, s)) == s


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([5, 11, 257, 2**31 - 1]), st.integers(1, 6), st.integers(0, 2**32))
def test_solve_round_trip(q, m, seed):
    F = Field(q)
    rng = np.random.default_rng(seed)
    while True:
        A = F.random(rng, (m, m))
        if F.rank(A) == m:
            break
    x = F.random(rng, (m, 3))
    assert np.array_equal(F.solve_linear(A, F.matmul(A, x)), x)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 5), st.integers(1, 5), st.integers(1, 4))
def test_matmul_large_modulus_exact(seed, r, inner, c):
    F = Field(2**31 - 1)
    rng = np.random.default_rng(seed)
    a, b = F.random(rng, (r, inner)), F.random(rng, (inner, c))
    ref = (a.astype(object) @ b.astype(object)) % F.q
    assert np.array_equal(F.matmul(a, b), ref.astype(np.int64))
    batch_a = F.random(rng, (2, r, inner))
    batch = F.matmul(batch_a, b)
    for i in range(2):
        assert np.array_equal(batch[i], F.matmul(batch_a[i], b))


def test_lagrange_interpolates():
    coeffs = [2, 3, 1]
    pts = [1, 2, 4]
    vals = [F7.poly_eval(coeffs, x) for x in pts]
    L = F7.lagrange_matrix(pts, [0, 3, 5])
    assert F7.matmul(L, np.array(vals)).tolist() == [F7.poly_eval(coeffs, t) for t in (0, 3, 5)]


def test_nullspace_and_solve_any():
    A = np.array([[1, 2, 3], [2, 4, 6]])
    N = F7.nullspace(A)
    assert N.shape == (2, 3)
    assert not F7.matmul(A, N.T).any()
    x = F7.solve_any(A, np.array([1, 2]))
    assert F7.matmul(A, x).tolist() == [1, 2]
    assert F7.solve_any(A, np.array([1, 3])) is None


def test_poly_divmod():
    q, r = F7.poly_divmod([6, 5, 1], [2, 1])  # (x+2)(x+3)
    assert q == [3, 1] and r == [0]
