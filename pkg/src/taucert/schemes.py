"""Zero-dimensional schemes: fat points kP and (2,3)-points Z(O, L).

A scheme is turned into linear conditions on degree-d forms through
derivative functionals evaluated at its support points.  ``kP`` imposes all
partials of order k-1 at P (lower orders follow by Euler's identity).
``Z(O, L)`` with L = span{O, w} imposes ``dF/dx_i (O) = 0`` and
``(d_w dF/dx_i)(O) = 0`` for every i; one of the 2m+2 rows is redundant by
Euler, leaving the 2m+1 conditions of the ideal q^3 + l^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Sequence, Union

import numpy as np

from .domains import Domain, RATIONAL
from .forms import (
    DenseForm,
    _derivative_table,
    derivative,
    directional_derivative,
    evaluate,
    monomial_basis,
    monomial_values,
    n_monomials,
)

Coords = tuple


class SchemeError(ValueError):
    """Invalid scheme data (coincident supports, degenerate lines, bad kinds)."""


def _proportional(a: Sequence, b: Sequence, domain: Domain) -> bool:
    for i, j in combinations(range(len(a)), 2):
        cross = a[i] * b[j] - a[j] * b[i]
        if not domain.is_zero(domain.scalar(cross)):
            return False
    return True


def _is_zero_vector(a: Sequence, domain: Domain) -> bool:
    return all(domain.is_zero(domain.scalar(x)) for x in a)


@dataclass(frozen=True)
class FatPoint:
    point: Coords
    k: int

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(self.point))
        if self.k not in (2, 3, 4):
            raise SchemeError(f"fat point multiplicity must be 2, 3 or 4, got {self.k}")

    @property
    def support(self) -> Coords:
        return self.point

    def degree(self, m: int) -> int:
        return comb(m + self.k - 1, m)

    @property
    def kind(self) -> str:
        return f"{self.k}P"


@dataclass(frozen=True)
class TwoThreePoint:
    """Z(O, L): the (2,3)-point at O along the line spanned by O and w."""

    O: Coords
    w: Coords

    def __post_init__(self):
        object.__setattr__(self, "O", tuple(self.O))
        object.__setattr__(self, "w", tuple(self.w))
        if len(self.O) != len(self.w):
            raise SchemeError("O and w must have the same length")
        if _all_integral(self.O + self.w) and _proportional(self.O, self.w, RATIONAL):
            raise SchemeError("the direction w is proportional to O")

    @property
    def support(self) -> Coords:
        return self.O

    def degree(self, m: int) -> int:
        return 2 * m + 1

    @property
    def kind(self) -> str:
        return "Z"


def _all_integral(values) -> bool:
    return all(isinstance(v, (int, np.integer)) for v in values)


Component = Union[FatPoint, TwoThreePoint]


@dataclass(frozen=True)
class SchemeUnion:
    m: int
    components: tuple[Component, ...]
    domain: Domain = RATIONAL

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        dom = self.domain
        for c in comps:
            if len(c.support) != self.m + 1:
                raise SchemeError(f"support {c.support} does not live in P^{self.m}")
            if _is_zero_vector(c.support, dom):
                raise SchemeError("the zero vector is not a projective point")
            if isinstance(c, TwoThreePoint) and _proportional(c.O, c.w, dom):
                raise SchemeError(f"degenerate (2,3)-point: w is proportional to O over {dom.tag}")
        for a, b in combinations(comps, 2):
            if _proportional(a.support, b.support, dom):
                raise SchemeError(f"components share the support point {a.support}")

    @property
    def kinds(self) -> list[str]:
        return [c.kind for c in self.components]

    def __len__(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class Functional:
    """A derivative functional at a point.

    Either ``alpha`` is set (the mixed partial ``d^alpha``) or ``direction``
    and ``index`` are (the operator ``d_u d/dx_i``).
    """

    point: Coords
    alpha: tuple[int, ...] | None = None
    direction: Coords | None = None
    index: int | None = None

    def __post_init__(self):
        if (self.alpha is None) == (self.direction is None):
            raise ValueError("give exactly one of alpha or (direction, index)")

    @property
    def order(self) -> int:
        return sum(self.alpha) if self.alpha is not None else 2

    def row(self, d: int, domain: Domain) -> np.ndarray:
        """Values of the functional on the degree-d monomial basis."""
        m = len(self.point) - 1
        if self.alpha is not None:
            return _alpha_row(m, d, self.alpha, self.point, domain)
        out = domain.zeros(n_monomials(m, d))
        for k, uk in enumerate(self.direction):
            uk = domain.scalar(uk)
            if domain.is_zero(uk):
                continue
            alpha = [0] * (m + 1)
            alpha[self.index] += 1
            alpha[k] += 1
            out = domain.reduce(out + domain.reduce(_alpha_row(m, d, tuple(alpha), self.point, domain) * uk))
        return out

    def apply(self, F: DenseForm):
        """Evaluate on a form by differentiating and evaluating."""
        if self.alpha is not None:
            return evaluate(derivative(F, self.alpha), self.point)
        dF = directional_derivative(F, self.direction)
        alpha = [0] * (F.m + 1)
        alpha[self.index] = 1
        return evaluate(derivative(dF, alpha), self.point)


def _alpha_row(m: int, d: int, alpha: tuple[int, ...], point, domain: Domain) -> np.ndarray:
    idx, factors = _derivative_table(m, d, tuple(alpha))
    vals = monomial_values(m, d - sum(alpha), point, domain)
    out = domain.zeros(n_monomials(m, d))
    out[idx] = domain.reduce(vals * domain.asarray(factors))
    return out


def scheme_degree(S: SchemeUnion) -> int:
    return sum(c.degree(S.m) for c in S.components)


def conditions(S: SchemeUnion, d: int) -> list[Functional]:
    """The derivative functionals cutting out H^0(I_S(d))."""
    if d < 3:
        raise ValueError(f"conditions need d >= 3, got d={d}")
    out: list[Functional] = []
    m = S.m
    for c in S.components:
        if isinstance(c, FatPoint):
            out.extend(Functional(c.point, alpha=a) for a in monomial_basis(m, c.k - 1))
        else:
            out.extend(Functional(c.O, alpha=a) for a in monomial_basis(m, 1))
            out.extend(Functional(c.O, direction=c.w, index=i) for i in range(m + 1))
    return out


# ----------------------------------------------------------------------
# random general unions

KINDS = {"2P": 2, "3P": 3, "4P": 4, "Z": None}


def parse_kinds(spec) -> list[str]:
    """Accept ``["Z", "2P", ...]`` or ``"Z,2P*3,4P"`` style specs."""
    if isinstance(spec, str):
        tokens = [tok.strip() for tok in spec.split(",") if tok.strip()]
    else:
        tokens = list(spec)
    out = []
    for tok in tokens:
        kind, _, count = str(tok).partition("*")
        kind = kind.strip()
        if kind not in KINDS:
            raise SchemeError(f"unknown component kind {kind!r}; expected one of {sorted(KINDS)}")
        out.extend([kind] * (int(count) if count else 1))
    return out


def random_scheme(kinds, m: int, seed, domain: Domain, max_retries: int = 100) -> SchemeUnion:
    """A general union of the given component kinds with seeded random supports."""
    kinds = parse_kinds(kinds)
    rng = np.random.default_rng(seed)
    supports: list[tuple] = []

    def draw():
        return tuple(domain.scalar(x) for x in domain.random_vector(rng, m + 1))

    def fresh_point():
        for _ in range(max_retries):
            P = draw()
            if _is_zero_vector(P, domain):
                continue
            if any(_proportional(P, Q, domain) for Q in supports):
                continue
            supports.append(P)
            return P
        raise SchemeError(f"could not draw distinct points over {domain.tag}")

    comps: list[Component] = []
    for kind in kinds:
        P = fresh_point()
        if kind == "Z":
            for _ in range(max_retries):
                w = draw()
                if not _proportional(P, w, domain):
                    break
            else:
                raise SchemeError(f"could not draw a direction independent of O over {domain.tag}")
            comps.append(TwoThreePoint(P, w))
        else:
            comps.append(FatPoint(P, KINDS[kind]))
    return SchemeUnion(m, tuple(comps), domain)
