"""Condition matrices, exact ranks, h^0/h^1 of I_Z(d) and generic-rank certificates.

Generic statements are certified by semicontinuity: the rank of an integer
condition matrix over F_p never exceeds its rank over Q, and the rank at a
special configuration never exceeds the generic one.  Reaching the maximal
rank ``min(deg Z, C(m+d, m))`` at one random configuration over F_p
therefore proves the generic characteristic-0 statement.  Failing to reach
it proves nothing.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .domains import SECOND_PRIME, Domain, DomainError, prime_field
from .forms import DenseForm, n_monomials
from .linalg import nullspace_mod_p, nullspace_rational, rank_mod_p, rank_rational
from .schemes import SchemeUnion, conditions, parse_kinds, random_scheme, scheme_degree

log = logging.getLogger(__name__)

CHAR0_NOTE = (
    "maximal rank over F_p at one configuration lower-bounds the generic rank over Q; "
    "a certified verdict proves the characteristic-0 statement"
)


class EmptySystemError(ValueError):
    """The condition matrix has full column rank: |I_Z(d)| is empty."""


@dataclass(frozen=True)
class ConditionMatrix:
    entries: np.ndarray
    domain: Domain
    m: int
    d: int
    provenance: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def _resolve_domain(S: SchemeUnion, domain: Domain | None) -> Domain:
    if domain is None or domain == S.domain:
        return S.domain
    # integer coordinates over Q reduce to any prime field
    if S.domain.kind == "rational" and domain.is_prime:
        coords = [x for c in S.components for x in c.support + getattr(c, "w", ())]
        if all(isinstance(x, (int, np.integer)) for x in coords):
            return domain
    raise DomainError(f"scheme points live over {S.domain.tag}, cannot assemble over {domain.tag}")


def assemble(S: SchemeUnion, d: int, domain: Domain | None = None, provenance: dict | None = None) -> ConditionMatrix:
    """Matrix whose kernel is the coefficient space of H^0(I_S(d))."""
    dom = _resolve_domain(S, domain)
    funcs = conditions(S, d)
    n_cols = n_monomials(S.m, d)
    if funcs:
        entries = np.vstack([f.row(d, dom) for f in funcs])
    else:
        entries = dom.zeros((0, n_cols))
    prov = {"scheme": S.kinds, "domain": dom.tag}
    prov.update(provenance or {})
    return ConditionMatrix(entries, dom, S.m, d, prov)


def rank(M: ConditionMatrix) -> int:
    if M.entries.shape[0] == 0:
        return 0
    if M.domain.is_prime:
        return rank_mod_p(M.entries, M.domain.p)
    if M.domain.kind == "rational":
        return rank_rational(M.entries)
    raise DomainError("exact rank is not defined over floats")


@dataclass(frozen=True)
class Cohomology:
    h0: int
    h1: int
    rank: int
    degree: int
    n_cols: int


def cohomology(S: SchemeUnion, d: int, domain: Domain | None = None) -> Cohomology:
    """h^0 and h^1 of I_S(d) at the given configuration."""
    M = assemble(S, d, domain)
    r = rank(M)
    n = n_monomials(S.m, d)
    deg = scheme_degree(S)
    return Cohomology(h0=n - r, h1=deg - r, rank=r, degree=deg, n_cols=n)


def kernel_matrix(M: ConditionMatrix) -> np.ndarray:
    n = n_monomials(M.m, M.d)
    if M.domain.is_prime:
        return nullspace_mod_p(M.entries, M.domain.p, n_cols=n)
    if M.domain.kind == "rational":
        return np.array(nullspace_rational(M.entries, n_cols=n), dtype=object).reshape(-1, n)
    raise DomainError("kernels are computed over exact domains only")


def kernel_forms(S: SchemeUnion, d: int, domain: Domain | None = None) -> list[DenseForm]:
    """A basis of H^0(I_S(d)) as forms."""
    M = assemble(S, d, domain)
    K = kernel_matrix(M)
    if len(K) == 0:
        raise EmptySystemError(f"{S.kinds} imposes {n_monomials(S.m, d)} independent conditions in degree {d}")
    return [DenseForm(S.m, d, row, M.domain) for row in K]


def random_kernel_form(M: ConditionMatrix, rng: np.random.Generator) -> DenseForm:
    """A uniformly random element of the kernel (a general member of |I_Z(d)|)."""
    K = kernel_matrix(M)
    if len(K) == 0:
        raise EmptySystemError("empty linear system")
    dom = M.domain
    coeffs = dom.random_vector(rng, len(K))
    if dom.is_prime:
        combo = dom.zeros(K.shape[1])
        for c, row in zip(coeffs, K):
            combo = dom.reduce(combo + dom.reduce(row * c))
    else:
        combo = np.dot(coeffs, K)
    return DenseForm(M.m, M.d, combo, dom)


# ----------------------------------------------------------------------
# certificates


@dataclass
class Certificate:
    label: str
    m: int
    d: int
    t: int | None
    scheme: list[str]
    trials: int
    prime: int
    primes: list[int]
    seeds: list[list[int]]
    trial_ranks: list[int]
    achieved_rank: int
    expected_rank: int
    scheme_degree: int
    n_cols: int
    verdict: str
    note: str = CHAR0_NOTE
    checks: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    def to_dict(self) -> dict:
        out = asdict(self)
        out["type"] = "Certificate"
        return out


def compact_kinds(kinds: list[str]) -> str:
    """``["Z", "2P", "2P"]`` -> ``"Z,2P*2"``."""
    out, i = [], 0
    while i < len(kinds):
        j = i
        while j < len(kinds) and kinds[j] == kinds[i]:
            j += 1
        out.append(kinds[i] if j - i == 1 else f"{kinds[i]}*{j - i}")
        i = j
    return ",".join(out)


def generic_rank_certificate(
    spec,
    m: int,
    d: int,
    trials: int = 5,
    seed: int = 0,
    prime: int | None = None,
    second_prime: int | None = SECOND_PRIME,
    label: str = "custom",
    t: int | None = None,
) -> Certificate:
    """Certify that a general union of ``spec`` imposes independent conditions.

    Trials draw independent schemes with seeds ``[seed, k]`` over F_prime and
    stop at the first trial of maximal rank.  An inconclusive trial is re-run
    over ``second_prime`` to rule out an unlucky modulus.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    kinds = parse_kinds(spec)
    dom = prime_field(prime)
    domains = [dom]
    if second_prime is not None and second_prime != dom.p:
        domains.append(prime_field(second_prime))
    n_cols = comb(m + d, m)
    degree = None
    expected = None
    seeds, ranks, primes_used = [], [], []
    certified = False
    for k in range(trials):
        for dk in domains:
            S = random_scheme(kinds, m, [seed, k], dk)
            if degree is None:
                degree = scheme_degree(S)
                expected = min(degree, n_cols)
            r = rank(assemble(S, d))
            seeds.append([seed, k])
            ranks.append(r)
            if dk.p not in primes_used:
                primes_used.append(dk.p)
            log.debug("%s m=%d d=%d trial=%d p=%d rank=%d/%d", label, m, d, k, dk.p, r, expected)
            if r == expected:
                certified = True
                break
        if certified:
            break
    return Certificate(
        label=label,
        m=m,
        d=d,
        t=t,
        scheme=[compact_kinds(kinds)],
        trials=trials,
        prime=dom.p,
        primes=primes_used,
        seeds=seeds,
        trial_ranks=ranks,
        achieved_rank=max(ranks),
        expected_rank=expected,
        scheme_degree=degree,
        n_cols=n_cols,
        verdict="certified" if certified else "inconclusive",
    )
