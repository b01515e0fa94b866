from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from taucert.domains import (
    DEFAULT_PRIME,
    FLOAT,
    RATIONAL,
    SECOND_PRIME,
    Domain,
    DomainError,
    default_prime,
    parse_domain,
    prime_field,
)
from taucert.linalg import nullspace_mod_p, nullspace_rational, rank_mod_p, rank_rational, rref_mod_p


def sympy_rank_mod_p(A, p):
    return DomainMatrix([[GF(p)(int(x)) for x in row] for row in A], (len(A), len(A[0])), GF(p)).rank()


matrices = st.integers(1, 7).flatmap(
    lambda r: st.integers(1, 7).flatmap(
        lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)
    )
)


@settings(max_examples=60, deadline=None)
@given(matrices)
def test_rank_rational_matches_sympy(A):
    assert rank_rational(A) == sp.Matrix(A).rank()


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([2, 3, 7, 101, DEFAULT_PRIME]))
def test_rank_mod_p_matches_sympy(A, p):
    assert rank_mod_p(np.array(A), p) == sympy_rank_mod_p(A, p)


def test_rank_drops_mod_small_prime():
    A = [[1, 1], [1, 6]]  # det 5
    assert rank_rational(A) == 2
    assert rank_mod_p(np.array(A), 5) == 1


@settings(max_examples=40, deadline=None)
@given(matrices, st.sampled_from([7, 101, DEFAULT_PRIME]))
def test_nullspace_mod_p(A, p):
    A = np.array(A)
    K = nullspace_mod_p(A, p, A.shape[1])
    assert K.shape[0] == A.shape[1] - rank_mod_p(A, p)
    for v in K:
        assert all(sum(int(a) * int(x) for a, x in zip(row, v)) % p == 0 for row in A)


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_nullspace_rational(A):
    K = nullspace_rational(A, len(A[0]))
    assert len(K) == len(A[0]) - sp.Matrix(A).rank()
    for v in K:
        assert all(sum(Fraction(a) * x for a, x in zip(row, v)) == 0 for row in A)


def test_rref_pivots():
    R, piv = rref_mod_p(np.array([[0, 2, 4], [0, 1, 2], [1, 0, 0]]), 7)
    assert piv == [0, 1]
    assert R[0].tolist() == [1, 0, 0] and R[1].tolist() == [0, 1, 2]


def test_rank_rational_with_fractions():
    assert rank_rational([[Fraction(1, 2), 1], [1, 2]]) == 1


def test_large_prime_uses_object_arithmetic():
    p = (1 << 61) - 1
    dom = prime_field(p)
    assert dom.dtype is object
    assert rank_mod_p(np.array([[p - 1, 1], [1, p - 1]], dtype=object), p) == 1


def test_domains():
    assert default_prime() == DEFAULT_PRIME
    assert sp.isprime(DEFAULT_PRIME) and sp.isprime(SECOND_PRIME)
    dom = prime_field(7)
    assert dom.tag == "F_7" and parse_domain("F_7") == dom
    assert parse_domain("rational") == RATIONAL and parse_domain("float") == FLOAT
    assert dom.scalar(Fraction(1, 2)) == 4
    assert dom.inv(3) == 5
    assert RATIONAL.scalar(0.5) == Fraction(1, 2)
    assert RATIONAL.to_json_scalar(Fraction(3, 4)) == "3/4"
    with pytest.raises(DomainError):
        Domain("prime", 1)
    with pytest.raises(DomainError):
        Domain("rational", 5)
    with pytest.raises(DomainError):
        Domain("complex")


def test_default_prime_env(monkeypatch):
    monkeypatch.setenv("TAUCERT_PRIME", "101")
    assert prime_field().p == 101
