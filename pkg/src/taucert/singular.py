"""Singular points of a plane curve {F = 0} over the algebraic closure of F_p.

After a random projective change of coordinates every expected singular
point sits in the chart z = 1 with a distinct x-coordinate, and the partials
G_x, G_y, G_z have nonzero constant leading coefficients in y.  Then the
x-coordinates of all common zeros of the partials in the chart are roots of

    g = gcd(Res_y(G_x, G_y), Res_y(G_x, G_z), Res_y(G_y, G_z)).

If the squarefree part of g is exactly prod (x - x_P) over the expected
points and every such fibre contains a single common zero, the singular
locus in the chart is exactly the expected set.  The line z = 0 is checked
separately.  Resultants are found by evaluating Sylvester determinants at
deg + 1 abscissae and interpolating.

Univariate polynomials are lists of ints, lowest degree first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domains import Domain
from .forms import DenseForm, monomial_basis, multiply_linear, partial, power_form
from .linalg import rref_mod_p

Poly = list[int]


# ----------------------------------------------------------------------
# univariate arithmetic mod p


def trim(f: Poly) -> Poly:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_sub(f: Poly, g: Poly, p: int) -> Poly:
    n = max(len(f), len(g))
    return trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p for i in range(n)])


def poly_mul(f: Poly, g: Poly, p: int) -> Poly:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return trim(out)


def poly_divmod(f: Poly, g: Poly, p: int) -> tuple[Poly, Poly]:
    g = trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = trim(f)
    inv = pow(g[-1], -1, p)
    q = [0] * max(len(r) - len(g) + 1, 0)
    while len(r) >= len(g):
        c = r[-1] * inv % p
        shift = len(r) - len(g)
        q[shift] = c
        for i, b in enumerate(g):
            r[shift + i] = (r[shift + i] - c * b) % p
        r = trim(r)
    return trim(q), r


def monic(f: Poly, p: int) -> Poly:
    f = trim(f)
    if not f:
        return f
    inv = pow(f[-1], -1, p)
    return [c * inv % p for c in f]


def poly_gcd(f: Poly, g: Poly, p: int) -> Poly:
    f, g = trim(f), trim(g)
    while g:
        f, g = g, poly_divmod(f, g, p)[1]
    return monic(f, p)


def poly_deriv(f: Poly, p: int) -> Poly:
    return trim([i * c % p for i, c in enumerate(f)][1:])


def squarefree(f: Poly, p: int) -> Poly:
    """Product of the distinct irreducible factors (valid while deg f < p)."""
    f = monic(f, p)
    if len(f) <= 1:
        return f
    return monic(poly_divmod(f, poly_gcd(f, poly_deriv(f, p), p), p)[0], p)


def poly_eval(f: Poly, x: int, p: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def from_roots(roots, p: int) -> Poly:
    out = [1]
    for r in roots:
        out = poly_mul(out, [(-r) % p, 1], p)
    return out


def interpolate(xs, ys, p: int) -> Poly:
    """Newton interpolation through (xs, ys) over F_p."""
    n = len(xs)
    coef = [y % p for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * pow((xs[i] - xs[i - j]) % p, -1, p) % p
    out: Poly = [coef[-1]]
    for i in range(n - 2, -1, -1):
        out = poly_mul(out, [(-xs[i]) % p, 1], p) if out else []
        out = poly_sub(out, [(-coef[i]) % p], p)
    return trim(out)


def det_mod_p(A, p: int) -> int:
    A = np.array([[int(x) % p for x in row] for row in A], dtype=object)
    n = len(A)
    det = 1
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r, c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            det = -det
        det = det * A[c, c] % p
        inv = pow(int(A[c, c]), -1, p)
        for r in range(c + 1, n):
            if A[r, c]:
                f = A[r, c] * inv % p
                A[r, c:] = (A[r, c:] - f * A[c, c:]) % p
    return det % p


def sylvester_resultant(f: Poly, g: Poly, p: int, deg_f: int, deg_g: int) -> int:
    """Resultant of two polynomials with formal degrees ``deg_f``, ``deg_g``."""
    f = list(f) + [0] * (deg_f + 1 - len(f))
    g = list(g) + [0] * (deg_g + 1 - len(g))
    n = deg_f + deg_g
    if n == 0:
        return 1
    S = [[0] * n for _ in range(n)]
    for i in range(deg_g):
        for k, c in enumerate(reversed(f)):
            S[i][i + k] = c
    for i in range(deg_f):
        for k, c in enumerate(reversed(g)):
            S[deg_g + i][i + k] = c
    return det_mod_p(S, p)


# ----------------------------------------------------------------------
# plane curves


def change_coordinates(F: DenseForm, A) -> DenseForm:
    """``G(y) = F(A y)``, i.e. substitute ``x_j = sum_k A[j, k] y_k``."""
    dom = F.domain
    rows = [dom.asarray(list(A[j])) for j in range(F.m + 1)]
    powers = [[power_form(rows[j], k, dom) for k in range(F.degree + 1)] for j in range(F.m + 1)]
    out = DenseForm.zero(F.m, F.degree, dom)
    for alpha, c in zip(monomial_basis(F.m, F.degree), F.coeffs):
        if c == 0:
            continue
        term = powers[0][alpha[0]].scale(c)
        for j in range(1, F.m + 1):
            for _ in range(alpha[j]):
                term = multiply_linear(term, rows[j])
        out = out + term
    return out


def _chart_coefficients(G: DenseForm) -> list[list[int]]:
    # C[i][j]: coefficient of x^i y^j in G(x, y, 1)
    e = G.degree
    C = [[0] * (e + 1) for _ in range(e + 1)]
    for (a, b, _), c in zip(monomial_basis(2, e), G.coeffs):
        C[a][b] = int(c)
    return C


def _fibre(C, x0: int, p: int) -> Poly:
    """G(x0, y, 1) as a polynomial in y."""
    e = len(C) - 1
    return trim([sum(C[i][j] * pow(x0, i, p) for i in range(e + 1 - j)) % p for j in range(e + 1)])


def _at_infinity(G: DenseForm) -> Poly:
    # G(x, 1, 0) as a polynomial in x
    e = G.degree
    out = [0] * (e + 1)
    for (a, b, c3), c in zip(monomial_basis(2, e), G.coeffs):
        if c3 == 0:
            out[a] = int(c)
    return trim(out)


@dataclass
class SingularLocus:
    matched: bool
    points: list[tuple[int, ...]]
    extra_degree: int
    at_infinity: bool
    attempts: int
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "matched": self.matched,
            "points": [list(pt) for pt in self.points],
            "extra_degree": self.extra_degree,
            "at_infinity": self.at_infinity,
            "attempts": self.attempts,
            "notes": list(self.notes),
        }


def _normalize(P, p: int) -> tuple[int, ...]:
    P = [int(x) % p for x in P]
    lead = next(x for x in P if x)
    inv = pow(lead, -1, p)
    return tuple(x * inv % p for x in P)


def _inverse_mod_p(A, p: int):
    n = len(A)
    aug = np.array([[int(A[i][j]) for j in range(n)] + [int(i == j) for j in range(n)] for i in range(n)], dtype=object)
    R, pivots = rref_mod_p(aug, p)
    if pivots[:n] != list(range(n)):
        return None
    return [[int(x) for x in R[i, n:]] for i in range(n)]


def enumerate_singular_points(
    F: DenseForm, expected, rng: np.random.Generator, max_retries: int = 5
) -> SingularLocus:
    """Decide whether Sing{F = 0} equals the ``expected`` points exactly (m = 2)."""
    dom: Domain = F.domain
    if F.m != 2 or not dom.is_prime:
        raise ValueError("singular-point enumeration needs a plane curve over F_p")
    p = dom.p
    e = F.degree - 1
    expected = [tuple(int(x) for x in P) for P in expected]
    notes: list[str] = []
    result = None
    for attempt in range(1, max_retries + 1):
        A = [[int(x) for x in rng.integers(0, p, size=3)] for _ in range(3)]
        Ainv = _inverse_mod_p(A, p)
        if Ainv is None:
            notes.append("singular coordinate change, retrying")
            continue
        local = []
        for P in expected:
            q = [sum(Ainv[i][j] * P[j] for j in range(3)) % p for i in range(3)]
            if q[2] == 0:
                break
            inv = pow(q[2], -1, p)
            local.append((q[0] * inv % p, q[1] * inv % p))
        if len(local) != len(expected) or len({x for x, _ in local}) != len(local):
            notes.append("expected points not in general position for the chart, retrying")
            continue
        G = change_coordinates(F, A)
        grads = [partial(G, i) for i in range(3)]
        charts = [_chart_coefficients(g) for g in grads]
        if any(C[0][e] == 0 for C in charts):
            notes.append("degenerate leading coefficient in y, retrying")
            continue
        xs = list(range(e * e + 1))
        fibres_at = [[_fibre(C, x, p) for C in charts] for x in xs]
        resultants = []
        for a, b in ((0, 1), (0, 2), (1, 2)):
            ys = [sylvester_resultant(fb[a], fb[b], p, e, e) for fb in fibres_at]
            resultants.append(interpolate(xs, ys, p))
        g = poly_gcd(poly_gcd(resultants[0], resultants[1], p), resultants[2], p)
        if not g:
            return SingularLocus(False, [], -1, False, attempt, notes + ["partials share a common factor"])
        sqf = squarefree(g, p)
        target = from_roots([x for x, _ in local], p)
        quotient, remainder = poly_divmod(sqf, target, p)
        extra = len(sqf) - len(target) if not remainder else len(sqf) - 1
        fibres_ok = True
        if not remainder:
            for x0, y0 in local:
                common = poly_gcd(poly_gcd(*[_fibre(C, x0, p) for C in charts[:2]], p), _fibre(charts[2], x0, p), p)
                common = squarefree(common, p)
                if common != monic([(-y0) % p, 1], p):
                    fibres_ok = False
        inf = poly_gcd(poly_gcd(_at_infinity(grads[0]), _at_infinity(grads[1]), p), _at_infinity(grads[2]), p)
        corner = all(int(g_.coeffs[monomial_basis(2, e).index((e, 0, 0))]) == 0 for g_ in grads)
        at_infinity = len(inf) > 1 or corner
        matched = not remainder and extra == 0 and fibres_ok and not at_infinity
        result = SingularLocus(
            matched,
            [_normalize(P, p) for P in expected] if matched else [],
            extra,
            at_infinity,
            attempt,
            notes,
        )
        if matched:
            return result
        notes.append(f"attempt {attempt}: extra={extra} fibres_ok={fibres_ok} infinity={at_infinity}")
    if result is None:
        return SingularLocus(False, [], -1, False, max_retries, notes + ["no usable coordinate change"])
    return result
