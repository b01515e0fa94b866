"""Dense homogeneous forms in m+1 variables.

Monomials of a fixed degree are kept in graded reverse-lexicographic order
with ``x_0 > x_1 > ... > x_m``.  A :class:`DenseForm` is a coefficient vector
in that order over one of the scalar domains of :mod:`taucert.domains`; a
nonzero form of degree d doubles as a point of P^N, N = C(m+d, m) - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, prod

import numpy as np

from .domains import Domain

Monomial = tuple[int, ...]


# ----------------------------------------------------------------------
# numeric bounds


@dataclass(frozen=True)
class Params:
    """Ambient dimension ``m``, degree ``d`` and (optionally) summand count ``t``."""

    m: int
    d: int
    t: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.t is not None and self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")

    @property
    def N(self) -> int:
        return comb(self.m + self.d, self.m) - 1

    @property
    def alpha(self) -> int:
        return comb(self.m + self.d - 1, self.m) // (self.m + 1)

    @property
    def beta(self) -> int:
        return comb(self.m + self.d - 2, self.m) // (self.m + 1)

    def expected_dim_tau(self, t: int | None = None) -> int:
        t = self.t if t is None else t
        return min(self.N, t * (self.m + 1) - 2)

    def expected_dim_sigma(self, t: int | None = None) -> int:
        t = self.t if t is None else t
        return min(self.N, t * (self.m + 1) - 1)


def parameter_table(m: int, d: int, t: int | None = None) -> dict:
    """N, alpha, beta and (when ``t`` is given) the expected join dimensions."""
    params = Params(m, d, t)
    table = {"m": m, "d": d, "N": params.N, "alpha": params.alpha, "beta": params.beta}
    if t is not None:
        table["t"] = t
        table["expected_dim_tau"] = params.expected_dim_tau()
        table["expected_dim_sigma"] = params.expected_dim_sigma()
    return table


# ----------------------------------------------------------------------
# monomial indexing


@lru_cache(maxsize=None)
def monomial_basis(m: int, degree: int) -> tuple[Monomial, ...]:
    """All exponent vectors of length m+1 summing to ``degree``, grevlex-descending."""
    if m < 0 or degree < 0:
        raise ValueError("m and degree must be non-negative")

    def compositions(n_vars, total):
        if n_vars == 1:
            yield (total,)
            return
        for first in range(total, -1, -1):
            for rest in compositions(n_vars - 1, total - first):
                yield (first,) + rest

    return tuple(sorted(compositions(m + 1, degree), key=lambda a: a[::-1]))


@lru_cache(maxsize=None)
def monomial_index(m: int, degree: int) -> dict[Monomial, int]:
    return {a: i for i, a in enumerate(monomial_basis(m, degree))}


@lru_cache(maxsize=None)
def exponent_matrix(m: int, degree: int) -> np.ndarray:
    out = np.array(monomial_basis(m, degree), dtype=np.int64).reshape(-1, m + 1)
    out.setflags(write=False)
    return out


def n_monomials(m: int, degree: int) -> int:
    return comb(m + degree, m)


@lru_cache(maxsize=None)
def _shift_table(m: int, degree: int) -> np.ndarray:
    # shift[r, j] = index of basis[r] + e_j in the degree+1 basis
    target = monomial_index(m, degree + 1)
    rows = []
    for a in monomial_basis(m, degree):
        row = []
        for j in range(m + 1):
            b = list(a)
            b[j] += 1
            row.append(target[tuple(b)])
        rows.append(row)
    return np.array(rows, dtype=np.int64).reshape(-1, m + 1)


@lru_cache(maxsize=None)
def _derivative_table(m: int, degree: int, alpha: Monomial) -> tuple[np.ndarray, tuple[int, ...]]:
    # For each beta of degree (degree - |alpha|): source index of beta + alpha and
    # the falling-factorial factor prod_j (beta_j + alpha_j)! / beta_j!.
    source = monomial_index(m, degree)
    idx, factors = [], []
    for b in monomial_basis(m, degree - sum(alpha)):
        full = tuple(bj + aj for bj, aj in zip(b, alpha))
        idx.append(source[full])
        factors.append(prod(factorial(f) // factorial(bj) for f, bj in zip(full, b)))
    return np.array(idx, dtype=np.int64), tuple(factors)


@lru_cache(maxsize=None)
def factorial_weights(m: int, degree: int) -> tuple[int, ...]:
    """alpha! for every monomial, the weights of the apolar pairing."""
    return tuple(prod(factorial(e) for e in a) for a in monomial_basis(m, degree))


@lru_cache(maxsize=None)
def multinomials(m: int, degree: int) -> tuple[int, ...]:
    """degree! / alpha! for every monomial."""
    return tuple(factorial(degree) // w for w in factorial_weights(m, degree))


# ----------------------------------------------------------------------
# forms


@dataclass(frozen=True, eq=False)
class DenseForm:
    m: int
    degree: int
    coeffs: np.ndarray
    domain: Domain

    def __post_init__(self):
        coeffs = self.domain.asarray(self.coeffs) if self.coeffs.dtype != self.domain.dtype else self.coeffs.copy()
        coeffs = self.domain.reduce(coeffs)
        if coeffs.shape != (n_monomials(self.m, self.degree),):
            raise ValueError(
                f"expected {n_monomials(self.m, self.degree)} coefficients for degree "
                f"{self.degree} in {self.m + 1} variables, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_dict(cls, m: int, degree: int, terms: dict[Monomial, object], domain: Domain) -> "DenseForm":
        coeffs = domain.zeros(n_monomials(m, degree))
        index = monomial_index(m, degree)
        for a, c in terms.items():
            coeffs[index[tuple(a)]] += domain.scalar(c)
        return cls(m, degree, coeffs, domain)

    @classmethod
    def zero(cls, m: int, degree: int, domain: Domain) -> "DenseForm":
        return cls(m, degree, domain.zeros(n_monomials(m, degree)), domain)

    def terms(self) -> dict[Monomial, object]:
        return {a: c for a, c in zip(monomial_basis(self.m, self.degree), self.coeffs) if c != 0}

    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    def _check(self, other: "DenseForm"):
        if (self.m, self.degree, self.domain) != (other.m, other.degree, other.domain):
            raise ValueError("forms live in different spaces")

    def __add__(self, other: "DenseForm") -> "DenseForm":
        self._check(other)
        return DenseForm(self.m, self.degree, self.coeffs + other.coeffs, self.domain)

    def __sub__(self, other: "DenseForm") -> "DenseForm":
        self._check(other)
        return DenseForm(self.m, self.degree, self.coeffs - other.coeffs, self.domain)

    def __neg__(self) -> "DenseForm":
        return DenseForm(self.m, self.degree, -self.coeffs, self.domain)

    def scale(self, c) -> "DenseForm":
        return DenseForm(self.m, self.degree, self.coeffs * self.domain.scalar(c), self.domain)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DenseForm):
            return NotImplemented
        return (self.m, self.degree, self.domain) == (other.m, other.degree, other.domain) and bool(
            np.all(self.coeffs == other.coeffs)
        )

    __hash__ = None

    def __repr__(self) -> str:
        terms = " + ".join(
            f"{c}*" + "*".join(f"x{j}^{e}" for j, e in enumerate(a) if e) if any(a) else f"{c}"
            for a, c in self.terms().items()
        )
        return f"DenseForm(deg={self.degree}, {self.domain.tag}: {terms or '0'})"


def _as_vector(values, domain: Domain) -> np.ndarray:
    return values if isinstance(values, np.ndarray) and values.dtype == domain.dtype else domain.asarray(values)


def constant_form(m: int, c, domain: Domain) -> DenseForm:
    return DenseForm(m, 0, domain.asarray([c]), domain)


def linear_form(coeffs, domain: Domain) -> DenseForm:
    """Degree-1 form ``sum_j coeffs[j] x_j``."""
    vec = _as_vector(coeffs, domain)
    m = len(vec) - 1
    # degree-1 grevlex order is x_0, x_1, ..., x_m
    return DenseForm(m, 1, vec, domain)


def multiply_linear(F: DenseForm, L) -> DenseForm:
    """The product ``F * L`` with ``L`` given by its m+1 coefficients."""
    dom = F.domain
    vec = _as_vector(L, dom)
    if len(vec) != F.m + 1:
        raise ValueError("linear form has the wrong number of variables")
    shift = _shift_table(F.m, F.degree)
    out = dom.zeros(n_monomials(F.m, F.degree + 1))
    for j in range(F.m + 1):
        if vec[j] != 0:
            out[shift[:, j]] += dom.reduce(F.coeffs * vec[j])
    return DenseForm(F.m, F.degree + 1, out, dom)


def power_form(L, k: int, domain: Domain) -> DenseForm:
    """``L**k`` expanded by repeated multiplication."""
    if k < 0:
        raise ValueError("power must be non-negative")
    vec = _as_vector(L, domain)
    F = constant_form(len(vec) - 1, 1, domain)
    for _ in range(k):
        F = multiply_linear(F, vec)
    return F


def tangent_form(L, M, d: int, domain: Domain) -> DenseForm:
    """``L**(d-1) * M``, a point of the tangent developable."""
    if d < 2:
        raise ValueError("tangent forms need d >= 2")
    return multiply_linear(power_form(L, d - 1, domain), M)


def derivative(F: DenseForm, alpha) -> DenseForm:
    """Mixed partial derivative ``d^alpha F``."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != F.m + 1 or min(alpha) < 0:
        raise ValueError(f"bad multi-index {alpha}")
    order = sum(alpha)
    if order > F.degree:
        raise ValueError("derivative order exceeds the degree")
    if order == 0:
        return F
    idx, factors = _derivative_table(F.m, F.degree, alpha)
    dom = F.domain
    fac = dom.asarray(factors)
    return DenseForm(F.m, F.degree - order, dom.reduce(F.coeffs[idx] * fac), dom)


def partial(F: DenseForm, i: int) -> DenseForm:
    alpha = [0] * (F.m + 1)
    alpha[i] = 1
    return derivative(F, alpha)


def directional_derivative(F: DenseForm, u) -> DenseForm:
    """``sum_i u_i dF/dx_i``."""
    dom = F.domain
    vec = _as_vector(u, dom)
    out = DenseForm.zero(F.m, F.degree - 1, dom)
    for i, ui in enumerate(vec):
        if ui != 0:
            out = out + partial(F, i).scale(ui)
    return out


def monomial_values(m: int, degree: int, point, domain: Domain) -> np.ndarray:
    """The vector ``(P^alpha)_alpha`` over the degree-``degree`` basis."""
    P = _as_vector(point, domain)
    if len(P) != m + 1:
        raise ValueError("point has the wrong number of coordinates")
    E = exponent_matrix(m, degree)
    out = None
    for j in range(m + 1):
        pj = int(P[j]) if domain.kind == "prime" else P[j]
        powers = [domain.scalar(1)]
        for _ in range(degree):
            powers.append(domain.scalar(powers[-1] * pj))
        col = domain.asarray(powers)[E[:, j]]
        out = col if out is None else domain.reduce(out * col)
    return out


def evaluate(F: DenseForm, point):
    """``F(P)`` as a domain scalar."""
    vals = monomial_values(F.m, F.degree, point, F.domain)
    dom = F.domain
    if dom.kind == "prime":
        prods = dom.reduce(F.coeffs * vals)
        return int(sum(int(x) for x in prods) % dom.p)
    if dom.kind == "float":
        return float(np.dot(F.coeffs, vals))
    return dom.scalar(sum(F.coeffs * vals))


def apolar_pairing(F: DenseForm, G: DenseForm):
    """``G(d) F = sum_alpha alpha! f_alpha g_alpha`` for forms of equal degree.

    With this pairing ``<F, L^d> = d! F(L)`` and ``<F, L^(d-1) M> = (d-1)! (d_M F)(L)``.
    """
    F._check(G)
    dom = F.domain
    w = dom.asarray(factorial_weights(F.m, F.degree))
    prods = dom.reduce(dom.reduce(F.coeffs * G.coeffs) * w)
    if dom.kind == "prime":
        return int(sum(int(x) for x in prods) % dom.p)
    if dom.kind == "float":
        return float(prods.sum())
    return dom.scalar(sum(prods))


def hessian(F: DenseForm, point) -> np.ndarray:
    """The (m+1)x(m+1) matrix of second partials of F at ``point``."""
    dom = F.domain
    n = F.m + 1
    H = dom.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            H[i, j] = H[j, i] = evaluate(derivative(F, alpha), point)
    return H
