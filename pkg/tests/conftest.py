import sympy as sp

from taucert.forms import monomial_basis


def symbols(m):
    return sp.symbols(f"x0:{m + 1}")


def to_sympy(F):
    """Expression for a DenseForm over Q (or over the integers mod p as integers)."""
    xs = symbols(F.m)
    expr = 0
    for a, c in zip(monomial_basis(F.m, F.degree), F.coeffs):
        term = sp.Rational(c) if not hasattr(c, "numerator") else sp.Rational(c.numerator, c.denominator)
        for x, e in zip(xs, a):
            term *= x**e
        expr += term
    return sp.expand(expr)


def coeffs_from_sympy(expr, m, degree):
    poly = sp.Poly(sp.expand(expr), *symbols(m))
    return [poly.coeff_monomial(sp.Mul(*[x**e for x, e in zip(symbols(m), a)])) for a in monomial_basis(m, degree)]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
