"""Tangent spaces of the Veronese variety X and of its tangent developable,
and join dimensions by Terracini spans.

Points of P^N are degree-d forms.  ``T_[v^d] X`` is spanned by the m+1
forms ``v^(d-1) x_i``; the tangent space to the tangent developable at a
point of the line ``{v^(d-1)(a v + b w)}`` is spanned by ``v^(d-2) w x_i``
together with ``v^(d-1) x_i`` (the two blocks meet in ``v^(d-1) w``).

Under the apolar pairing these generators are exactly the condition rows of
``2[v]`` and ``Z([v], <v, w>)``, which is what :func:`duality_report`
checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Domain, prime_field
from .forms import DenseForm, factorial_weights, multiply_linear, power_form
from .interp import assemble
from .linalg import rank_mod_p, rank_rational
from .schemes import FatPoint, SchemeError, SchemeUnion, TwoThreePoint, _proportional


@dataclass(frozen=True)
class TangentVectorNu:
    """Base point ``[v^d]`` and direction ``w`` of a tangent vector to X."""

    v: tuple
    w: tuple

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(self.v))
        object.__setattr__(self, "w", tuple(self.w))


@dataclass(frozen=True)
class TangentFrame:
    generators: tuple[DenseForm, ...]
    label: str

    def matrix(self) -> np.ndarray:
        return np.vstack([g.coeffs for g in self.generators])


def _unit(m: int, i: int, domain: Domain) -> np.ndarray:
    e = domain.zeros(m + 1)
    e[i] = 1
    return e


def frame_X(v, d: int, domain: Domain) -> TangentFrame:
    """Generators ``v^(d-1) x_i`` of the tangent space to X at ``[v^d]``."""
    if d < 2:
        raise ValueError("frame_X needs d >= 2")
    vec = domain.asarray(v)
    if not np.any(vec != 0):
        raise ValueError("v must be nonzero")
    m = len(vec) - 1
    base = power_form(vec, d - 1, domain)
    return TangentFrame(tuple(multiply_linear(base, _unit(m, i, domain)) for i in range(m + 1)), "X")


def frame_tau(nu: TangentVectorNu, d: int, domain: Domain) -> TangentFrame:
    """Generators of the tangent space to the tangent developable along ``<nu>``."""
    if d < 3:
        raise ValueError("frame_tau needs d >= 3")
    if _proportional(nu.v, nu.w, domain):
        raise SchemeError("tangent direction w is proportional to v")
    v = domain.asarray(nu.v)
    w = domain.asarray(nu.w)
    m = len(v) - 1
    vw = multiply_linear(power_form(v, d - 2, domain), w)
    second = [multiply_linear(vw, _unit(m, i, domain)) for i in range(m + 1)]
    return TangentFrame(tuple(second) + frame_X(v, d, domain).generators, "tau")


def affine_rank(frames, domain: Domain) -> int:
    """Rank of the stacked generator matrices of one or more frames."""
    if isinstance(frames, TangentFrame):
        frames = [frames]
    A = np.vstack([f.matrix() for f in frames])
    if domain.is_prime:
        return rank_mod_p(A, domain.p)
    return rank_rational(A)


# ----------------------------------------------------------------------
# seeded join data


@dataclass(frozen=True)
class JoinData:
    """Seeded general data: ``nu = (v, w)`` and further base points ``v_i``."""

    v: tuple
    w: tuple
    points: tuple[tuple, ...]
    domain: Domain


def join_data(m: int, n_points: int, seed, domain: Domain, max_retries: int = 100) -> JoinData:
    rng = np.random.default_rng(seed)
    drawn: list[tuple] = []

    def draw(independent_of=()):
        for _ in range(max_retries):
            P = tuple(domain.scalar(x) for x in domain.random_vector(rng, m + 1))
            if all(domain.is_zero(x) for x in P):
                continue
            if any(_proportional(P, Q, domain) for Q in independent_of):
                continue
            return P
        raise SchemeError("could not draw general points")

    v = draw()
    drawn.append(v)
    w = draw([v])
    for _ in range(n_points):
        drawn.append(draw(drawn))
    return JoinData(v, w, tuple(drawn[1:]), domain)


def tau_join_frames(data: JoinData, d: int) -> list[TangentFrame]:
    frames = [frame_tau(TangentVectorNu(data.v, data.w), d, data.domain)]
    frames.extend(frame_X(p, d, data.domain) for p in data.points)
    return frames


def join_dimension_tau(m: int, d: int, t: int, seed=0, prime: int | None = None) -> int:
    """Projective dimension of the Terracini span of the join of the tangent
    developable with t-2 copies of X, at seeded random points."""
    if t < 2 or d < 3:
        raise ValueError("join_dimension_tau needs t >= 2 and d >= 3")
    dom = prime_field(prime)
    data = join_data(m, t - 2, seed, dom)
    return affine_rank(tau_join_frames(data, d), dom) - 1


def join_dimension_sigma(m: int, d: int, t: int, seed=0, prime: int | None = None) -> int:
    """Projective dimension of the Terracini span of t copies of X."""
    if t < 1:
        raise ValueError("t must be >= 1")
    dom = prime_field(prime)
    data = join_data(m, t, seed, dom)
    return affine_rank([frame_X(p, d, dom) for p in data.points], dom) - 1


# ----------------------------------------------------------------------
# primal / dual


@dataclass(frozen=True)
class DualityReport:
    m: int
    d: int
    t: int
    seed: object
    primal_dim: int
    dual_dim: int
    joint_rank: int

    @property
    def dims_agree(self) -> bool:
        return self.primal_dim == self.dual_dim

    @property
    def spans_equal(self) -> bool:
        return self.joint_rank - 1 == self.primal_dim == self.dual_dim


def duality_scheme(data: JoinData) -> SchemeUnion:
    """``Z(O, L) + sum 2P_i`` on the same points as the Terracini frames."""
    m = len(data.v) - 1
    comps = [TwoThreePoint(data.v, data.w)] + [FatPoint(p, 2) for p in data.points]
    return SchemeUnion(m, tuple(comps), data.domain)


def duality_report(m: int, d: int, t: int, seed=0, prime: int | None = None) -> DualityReport:
    dom = prime_field(prime)
    data = join_data(m, t - 2, seed, dom)
    frames = tau_join_frames(data, d)
    primal = np.vstack([f.matrix() for f in frames])
    # apolarity: the generator g pairs with F as sum alpha! g_alpha f_alpha
    weights = dom.asarray(factorial_weights(m, d))
    primal_as_functionals = dom.reduce(primal * weights)
    dual = assemble(duality_scheme(data), d).entries
    return DualityReport(
        m=m,
        d=d,
        t=t,
        seed=seed,
        primal_dim=rank_mod_p(primal, dom.p) - 1,
        dual_dim=rank_mod_p(dual, dom.p) - 1,
        joint_rank=rank_mod_p(np.vstack([primal_as_functionals, dual]), dom.p),
    )


def duality_check(m: int, d: int, t: int, seed=0, prime: int | None = None) -> bool:
    """Terracini span dimension equals rank of the (2,3)-point + double-point system minus one."""
    return duality_report(m, d, t, seed, prime).dims_agree
