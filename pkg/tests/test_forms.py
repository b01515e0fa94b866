from fractions import Fraction
from math import comb, factorial

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import coeffs_from_sympy, symbols, to_sympy
from taucert.domains import FLOAT, RATIONAL, prime_field
from taucert.forms import (
    DenseForm,
    Params,
    apolar_pairing,
    derivative,
    directional_derivative,
    evaluate,
    exponent_matrix,
    hessian,
    monomial_basis,
    monomial_index,
    multiply_linear,
    n_monomials,
    parameter_table,
    partial,
    power_form,
    tangent_form,
)

small_ints = st.integers(-5, 5)


def linear(m):
    return st.lists(small_ints, min_size=m + 1, max_size=m + 1)


def test_parameter_table_binomials():
    assert parameter_table(2, 7) == {"m": 2, "d": 7, "N": 35, "alpha": 9, "beta": 7}
    t = parameter_table(3, 7)
    assert (t["N"], t["beta"]) == (119, 14)
    assert parameter_table(5, 5)["alpha"] == 21
    full = parameter_table(2, 7, 3)
    assert full["expected_dim_tau"] == 7 and full["expected_dim_sigma"] == 8


@pytest.mark.parametrize("m,d", [(2, 6), (3, 9), (5, 6), (1, 4)])
def test_params_against_direct_binomials(m, d):
    p = Params(m, d)
    assert p.N == comb(m + d, m) - 1
    assert p.alpha == comb(m + d - 1, m) // (m + 1)
    assert p.beta == comb(m + d - 2, m) // (m + 1)


def test_expected_dimension_caps_at_N():
    p = Params(2, 4)
    assert p.expected_dim_sigma(10) == p.N == 14


def test_params_reject_nonsense():
    with pytest.raises(ValueError):
        Params(0, 3)


def test_monomial_order_is_grevlex():
    basis = monomial_basis(2, 2)
    assert len(basis) == 6
    # total degree equal, so grevlex: smaller last exponent is larger
    assert basis[-1] == (0, 0, 2)
    assert basis[0] == (2, 0, 0)
    idx = monomial_index(2, 2)
    assert all(idx[a] == i for i, a in enumerate(basis))
    assert np.array_equal(exponent_matrix(2, 2), np.array(basis))
    assert n_monomials(3, 7) == comb(10, 3)


@settings(max_examples=30, deadline=None)
@given(linear(2), st.integers(1, 6))
def test_power_form_matches_sympy(L, k):
    F = power_form(L, k, RATIONAL)
    xs = symbols(2)
    expected = sp.expand(sum(c * x for c, x in zip(L, xs)) ** k)
    assert coeffs_from_sympy(expected, 2, k) == [sp.Rational(c) for c in F.coeffs]


@settings(max_examples=30, deadline=None)
@given(linear(3), linear(3))
def test_tangent_form_matches_sympy(L, M):
    d = 5
    F = tangent_form(L, M, d, RATIONAL)
    xs = symbols(3)
    lin = lambda c: sum(ci * x for ci, x in zip(c, xs))  # noqa: E731
    assert sp.expand(to_sympy(F) - lin(L) ** (d - 1) * lin(M)) == 0


def test_monomial_plant_by_hand():
    F = tangent_form([0, 1, 0], [0, 0, 1], 7, RATIONAL) + power_form([1, 0, 0], 7, RATIONAL)
    assert F.terms() == {(0, 6, 1): 1, (7, 0, 0): 1}


@settings(max_examples=25, deadline=None)
@given(st.lists(small_ints, min_size=10, max_size=10), st.sampled_from([(1, 0, 0), (0, 2, 0), (1, 1, 1), (0, 0, 3)]))
def test_derivative_matches_sympy(cs, alpha):
    F = DenseForm(2, 3, np.array(cs, dtype=object), RATIONAL)
    xs = symbols(2)
    expected = sp.diff(to_sympy(F), *[x for x, e in zip(xs, alpha) for _ in range(e)])
    D = derivative(F, alpha)
    assert sp.expand(to_sympy(D) - expected) == 0


@settings(max_examples=25, deadline=None)
@given(st.lists(small_ints, min_size=10, max_size=10), linear(2), linear(2))
def test_evaluate_and_directional(cs, point, u):
    F = DenseForm(2, 3, np.array(cs, dtype=object), RATIONAL)
    xs = symbols(2)
    expr = to_sympy(F)
    subs = dict(zip(xs, point))
    assert evaluate(F, point) == expr.subs(subs)
    dirv = sum(ui * sp.diff(expr, x) for ui, x in zip(u, xs))
    assert sp.expand(to_sympy(directional_derivative(F, u)) - dirv) == 0


def test_partial_and_hessian():
    F = DenseForm.from_dict(2, 3, {(1, 1, 1): 2, (3, 0, 0): 1}, RATIONAL)
    assert partial(F, 0).terms() == {(0, 1, 1): 2, (2, 0, 0): 3}
    H = hessian(F, (1, 2, 3))
    xs = symbols(2)
    Hs = sp.hessian(to_sympy(F), xs).subs(dict(zip(xs, (1, 2, 3))))
    assert [[int(v) for v in row] for row in H] == [[int(v) for v in Hs.row(i)] for i in range(3)]


def test_apolar_pairing_identities():
    d = 5
    rng = np.random.default_rng(3)
    F = DenseForm(2, d, np.array([int(x) for x in rng.integers(-4, 5, n_monomials(2, d))], dtype=object), RATIONAL)
    L, M = (2, -1, 3), (1, 4, -2)
    assert apolar_pairing(F, power_form(L, d, RATIONAL)) == factorial(d) * evaluate(F, L)
    dM = directional_derivative(F, M)
    assert apolar_pairing(F, tangent_form(L, M, d, RATIONAL)) == factorial(d - 1) * evaluate(dM, L)


def test_multiply_linear_and_arithmetic():
    F = power_form((1, 1, 0), 2, RATIONAL)
    G = multiply_linear(F, (0, 0, 1))
    assert G == DenseForm.from_dict(2, 3, {(2, 0, 1): 1, (1, 1, 1): 2, (0, 2, 1): 1}, RATIONAL)
    assert (F - F).is_zero()
    assert (F + F) == F.scale(2)
    assert (-F + F).is_zero()


def test_prime_and_float_domains_agree_with_rational():
    p = 101
    L = (3, -7, 12)
    Fq = power_form(L, 4, RATIONAL)
    Fp = power_form(L, 4, prime_field(p))
    Ff = power_form(L, 4, FLOAT)
    assert [int(c) % p for c in Fq.coeffs] == [int(c) for c in Fp.coeffs]
    assert np.allclose([float(c) for c in Fq.coeffs], Ff.coeffs)


def test_fraction_coefficients():
    F = power_form((Fraction(1, 2), 1, 0), 2, RATIONAL)
    assert F.terms()[(2, 0, 0)] == Fraction(1, 4)


def test_coefficient_shape_checked():
    with pytest.raises(ValueError):
        DenseForm(2, 3, np.zeros(4, dtype=object), RATIONAL)
