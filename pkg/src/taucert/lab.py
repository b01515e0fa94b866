"""Planted decompositions ``f = L_(t-1)^(d-1) L_t + sum_(i<=t-2) L_i^d``.

Two kinds of evidence for uniqueness are produced here:

* local identifiability -- the Jacobian of the parametrization
  ``Phi(L_1, ..., L_t)`` has exact rank t(m+1) - 1 at the planted point, the
  one missing direction being ``(L_(t-1), L_t) -> (s L_(t-1), s^(1-d) L_t)``;
* multi-start recovery -- real least-squares fits of ``Phi(theta) = f`` from
  random starts; every fit that converges must reproduce the plant after
  canonicalization.

The parameter vector ``theta`` concatenates the t coefficient blocks of
length m+1 in the order ``L_1, ..., L_(t-2), L_(t-1), L_t``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import least_squares

from .certifier import HypothesisError, gate_drip
from .domains import RATIONAL, Domain
from .forms import DenseForm, exponent_matrix, multinomials, multiply_linear, n_monomials, power_form, tangent_form
from .linalg import rank_rational
from .schemes import _proportional

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MATCH_TOL = 1e-6
# scipy's MINPACK "lm" path is not bit-reproducible run to run
_METHOD = "trf"


@dataclass(frozen=True)
class PlantedInstance:
    m: int
    d: int
    t: int
    forms: tuple[tuple[int, ...], ...]
    seed: object = None

    @cached_property
    def f(self) -> DenseForm:
        dom = RATIONAL
        F = tangent_form(self.forms[-2], self.forms[-1], self.d, dom)
        for L in self.forms[:-2]:
            F = F + power_form(L, self.d, dom)
        return F

    @property
    def f_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.f.coeffs])

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.forms, dtype=float).ravel()


def plant(m: int, d: int, t: int, seed=0, allow_out_of_range: bool = False, max_retries: int = 1000) -> PlantedInstance:
    """A seeded planted instance with integer coefficients in [-9, 9]."""
    if not allow_out_of_range:
        gate_drip(m, d, t)
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        forms = [tuple(int(x) for x in rng.integers(-9, 10, size=m + 1)) for _ in range(t)]
        if any(not any(L) for L in forms):
            continue
        if any(_proportional(forms[i], forms[j], RATIONAL) for i in range(t) for j in range(i + 1, t)):
            continue
        return PlantedInstance(m, d, t, tuple(forms), seed)
    raise HypothesisError("could not draw a non-degenerate plant")


def parametrization_jacobian(inst: PlantedInstance, domain: Domain = RATIONAL) -> np.ndarray:
    """The t(m+1) x C(m+d, m) matrix of partials of Phi at the plant (rows = parameters)."""
    m, d = inst.m, inst.d
    unit = [[int(i == j) for j in range(m + 1)] for i in range(m + 1)]
    rows = []
    for L in inst.forms[:-2]:
        base = power_form(L, d - 1, domain).scale(d)
        rows.extend(multiply_linear(base, e).coeffs for e in unit)
    L, M = inst.forms[-2], inst.forms[-1]
    base = multiply_linear(power_form(L, d - 2, domain), M).scale(d - 1)
    rows.extend(multiply_linear(base, e).coeffs for e in unit)
    base = power_form(L, d - 1, domain)
    rows.extend(multiply_linear(base, e).coeffs for e in unit)
    return np.vstack(rows)


def jacobian_rank(inst: PlantedInstance) -> int:
    return rank_rational(parametrization_jacobian(inst))


def local_identifiability(inst: PlantedInstance) -> bool:
    return jacobian_rank(inst) == inst.t * (inst.m + 1) - 1


# ----------------------------------------------------------------------
# float model


class JoinModel:
    """Vectorized ``Phi`` and its Jacobian over binary64."""

    def __init__(self, m: int, d: int, t: int):
        if t < 2:
            raise ValueError("the model needs t >= 2 (one tangent pair)")
        self.m, self.d, self.t = m, d, t
        self.E = np.asarray(exponent_matrix(m, d))
        self.mult = np.array(multinomials(m, d), dtype=float)
        self.n = n_monomials(m, d)
        self.k = m + 1

    @property
    def n_params(self) -> int:
        return self.t * self.k

    def _monomials(self, L, shift=None) -> np.ndarray:
        # L^(E - shift) with negative exponents mapped to 0 (their prefactor vanishes)
        exps = self.E if shift is None else np.maximum(self.E - shift, 0)
        powers = np.power.outer(L, np.arange(self.d + 1))  # powers[j, e] = L_j^e
        return np.prod(powers[np.arange(self.k), exps], axis=1)

    @cached_property
    def _grad_tables(self):
        eye = np.eye(self.k, dtype=int)
        exps = np.maximum(self.E[None, :, :] - eye[:, None, :], 0)  # (k, n, k)
        coef = self.mult[:, None] * self.E  # (n, k)
        return exps, coef

    @cached_property
    def _hess_tables(self):
        eye = np.eye(self.k, dtype=int)
        shift = eye[:, None, :] + eye[None, :, :]  # (k, k, k)
        exps = np.maximum(self.E[None, None, :, :] - shift[:, :, None, :], 0)  # (k, k, n, k)
        diag = np.eye(self.k, dtype=int)
        coef = self.mult[:, None, None] * self.E[:, :, None] * (self.E[:, None, :] - diag[None, :, :])
        return exps, coef

    def _powers(self, L) -> np.ndarray:
        return np.power.outer(np.asarray(L, dtype=float), np.arange(self.d + 1))

    def power_grad(self, L) -> np.ndarray:
        """Columns ``d(L^d)/dL_j`` (n x k); ``L`` may carry leading batch axes."""
        exps, coef = self._grad_tables
        P = self._powers(L)  # (..., k, d+1)
        gathered = P[..., np.arange(self.k), exps]  # (..., k_j, n, k)
        vals = np.prod(gathered, axis=-1)  # (..., k_j, n)
        return np.swapaxes(vals, -1, -2) * coef

    def power_hess(self, L) -> np.ndarray:
        """``d^2(L^d)/dL_j dL_k`` as an (n, k, k) array."""
        exps, coef = self._hess_tables
        P = self._powers(L)
        vals = np.prod(P[np.arange(self.k), exps], axis=-1)  # (k, k, n)
        return np.moveaxis(vals, -1, 0) * coef

    def blocks(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        return theta.reshape(self.t, self.k)

    def phi(self, theta) -> np.ndarray:
        B = self.blocks(theta)
        out = np.zeros(self.n)
        for L in B[:-2]:
            out += self.mult * self._monomials(L)
        # L^(d-1) M = (1/d) sum_j M_j d(L^d)/dL_j
        out += self.power_grad(B[-2]) @ B[-1] / self.d
        return out

    def jacobian(self, theta) -> np.ndarray:
        B = self.blocks(theta)
        J = np.empty((self.n, self.n_params))
        k = self.k
        for i, L in enumerate(B[:-2]):
            J[:, i * k:(i + 1) * k] = self.power_grad(L)
        L, M = B[-2], B[-1]
        J[:, (self.t - 2) * k:(self.t - 1) * k] = np.einsum("njk,j->nk", self.power_hess(L), M) / self.d
        J[:, (self.t - 1) * k:] = self.power_grad(L) / self.d
        return J


def finite_difference_jacobian(model: JoinModel, theta, h: float = 1e-6) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    J = np.empty((model.n, model.n_params))
    for c in range(model.n_params):
        step = h * max(1.0, abs(theta[c]))
        up, down = theta.copy(), theta.copy()
        up[c] += step
        down[c] -= step
        J[:, c] = (model.phi(up) - model.phi(down)) / (2 * step)
    return J


def gradient_check(m: int, d: int, t: int, seed=0, samples: int = 10) -> float:
    """Worst relative Frobenius error of the analytic Jacobian vs central differences."""
    model = JoinModel(m, d, t)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        theta = rng.standard_normal(model.n_params) / np.sqrt(model.k)
        Ja = model.jacobian(theta)
        Jf = finite_difference_jacobian(model, theta)
        worst = max(worst, float(np.linalg.norm(Ja - Jf) / np.linalg.norm(Ja)))
    return worst


# ----------------------------------------------------------------------
# canonical form


def _sign_normalize(L: np.ndarray, eps: float = 1e-8) -> tuple[float, np.ndarray]:
    norm = float(np.linalg.norm(L))
    if norm == 0.0:
        raise ValueError("zero block cannot be canonicalized")
    u = L / norm
    lead = next(x for x in u if abs(x) > eps)
    s = 1.0 if lead > 0 else -1.0
    return s * norm, s * u


def canonicalize(theta, m: int, d: int, t: int) -> np.ndarray:
    """Remove permutation and scaling freedom from a parameter vector.

    Power blocks become ``(c_i, u_i)`` with ``L_i^d = c_i u_i^d``, ``|u_i| = 1``
    and first nonzero entry of ``u_i`` positive, sorted lexicographically by
    ``u_i``.  The tangent pair becomes ``(u, M')`` with
    ``L^(d-1) M = u^(d-1) M'`` and u normalized the same way.
    """
    B = np.asarray(theta, dtype=float).reshape(t, m + 1)
    power_blocks = []
    for L in B[:-2]:
        scale, u = _sign_normalize(L)
        power_blocks.append((tuple(u), scale**d))
    power_blocks.sort()
    scale, u = _sign_normalize(B[-2])
    M = B[-1] * scale ** (d - 1)
    if not np.any(M):
        raise ValueError("zero block cannot be canonicalized")
    parts = [np.concatenate([[c], u_]) for u_, c in power_blocks]
    parts += [u, M]
    return np.concatenate(parts)


def decompositions_match(theta_a, theta_b, m: int, d: int, t: int, tol: float = DEFAULT_MATCH_TOL) -> bool:
    a = canonicalize(theta_a, m, d, t)
    b = canonicalize(theta_b, m, d, t)
    return bool(np.max(np.abs(a - b)) < tol)


# ----------------------------------------------------------------------
# multi-start recovery


@dataclass
class RecoveryResult:
    m: int
    d: int
    t: int
    restarts: int
    seed: object
    tol: float
    match_tol: float
    candidates: list[tuple[list[float], float]]
    converged_count: int
    matched_count: int
    matched: bool
    red_alert: bool = False
    non_matching: list[int] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        if self.red_alert:
            return "red_alert"
        return "matched" if self.matched else "inconclusive"

    def to_dict(self) -> dict:
        return {
            "type": "RecoveryResult",
            "m": self.m,
            "d": self.d,
            "t": self.t,
            "restarts": self.restarts,
            "seed": self.seed,
            "tol": self.tol,
            "match_tol": self.match_tol,
            "candidates": [{"theta": list(th), "residual": r} for th, r in self.candidates],
            "converged_count": self.converged_count,
            "matched_count": self.matched_count,
            "matched": self.matched,
            "red_alert": self.red_alert,
            "non_matching": list(self.non_matching),
            "verdict": self.verdict,
        }


class _Projected:
    """Variable-projection view of the model for a fixed list of term types.

    Each term contributes a direction ``u`` (used through ``u/|u|``) and
    linear weights: one column ``u^d`` for a power term ("p"), or the m+1
    columns ``u^(d-1) x_j`` for the tangent term ("T").  Weights are solved by
    least squares, so only directions are searched.
    """

    def __init__(self, model: JoinModel, y: np.ndarray, types: list[str]):
        self.model, self.y, self.types = model, y, list(types)
        self.k = model.k
        self._eye = np.eye(self.k)
        self._cache = None

    def _term(self, u, kind):
        nu = np.linalg.norm(u)
        uh = u / nu
        chain = (self._eye - np.outer(uh, uh)) / nu
        if kind == "p":
            cols = (self.model.mult * self.model._monomials(uh))[:, None]
            return cols, lambda c: self.model.power_grad(uh) @ chain * c[0]
        cols = self.model.power_grad(uh) / self.model.d
        return cols, lambda c: np.einsum("njk,j->nk", self.model.power_hess(uh), c) @ chain / self.model.d

    def solve(self, U):
        U = np.asarray(U, dtype=float)
        key = U.tobytes()
        if self._cache is not None and self._cache[0] == key:
            return self._cache[1]
        blocks = U.reshape(len(self.types), self.k)
        terms = [self._term(u, kind) for u, kind in zip(blocks, self.types)]
        A = np.hstack([cols for cols, _ in terms])
        c, *_ = np.linalg.lstsq(A, self.y, rcond=None)
        self._cache = (key, (A, c, terms))
        return A, c, terms

    def residual(self, U):
        A, c, _ = self.solve(U)
        return A @ c - self.y

    def jacobian(self, U):
        # Kaufman approximation: J = P_perp (dA/du) c
        A, c, terms = self.solve(U)
        Q, _ = np.linalg.qr(A)
        D = np.empty((self.model.n, len(self.types) * self.k))
        pos = 0
        for i, (cols, deriv) in enumerate(terms):
            width = cols.shape[1]
            D[:, i * self.k:(i + 1) * self.k] = deriv(c[pos:pos + width])
            pos += width
        return D - Q @ (Q.T @ D)

    def contributions(self, U):
        A, c, terms = self.solve(U)
        out, pos = [], 0
        for cols, _ in terms:
            width = cols.shape[1]
            out.append(cols @ c[pos:pos + width])
            pos += width
        return out, c

    def optimize(self, U0, max_nfev: int = 30):
        sol = least_squares(
            self.residual, np.asarray(U0, dtype=float), jac=self.jacobian, method=_METHOD,
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev,
        )
        return sol.x, float(np.linalg.norm(sol.fun))

    def to_theta(self, U):
        """Translate directions + weights into a ``Phi`` parameter vector."""
        d = self.model.d
        U = np.asarray(U, dtype=float).reshape(len(self.types), self.k)
        _, c = self.contributions(U)
        powers, tangent, pos = [], None, 0
        for u, kind in zip(U, self.types):
            uh = u / np.linalg.norm(u)
            if kind == "p":
                w = c[pos]
                pos += 1
                if w < 0 and d % 2 == 0:
                    return None  # a negative even power has no real root
                powers.append(np.sign(w) * abs(w) ** (1.0 / d) * uh)
            else:
                tangent = np.concatenate([uh, c[pos:pos + self.k]])
                pos += self.k
        return np.concatenate(powers + [tangent])


def _screened_direction(proj: _Projected, rng, target, kind, candidates):
    """Best of ``candidates`` Gaussian directions by projection of ``target``."""
    model = proj.model
    U = rng.standard_normal((candidates, proj.k))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    if kind == "p":
        P = model._powers(U)  # (K, k, d+1)
        cols = model.mult * np.prod(P[:, np.arange(proj.k), model.E], axis=-1)  # (K, n)
        score = np.abs(cols @ target) / np.linalg.norm(cols, axis=1)
    else:
        G = model.power_grad(U)  # (K, n, k)
        g = np.einsum("knj,n->kj", G, target)
        gram = np.einsum("kni,knj->kij", G, G)
        score = np.einsum("kj,kj->k", g, np.linalg.solve(gram, g[..., None])[..., 0])
    return U[int(np.argmax(score))]


def _one_restart(model: JoinModel, y, rng, tol, candidates, sweeps):
    """Greedy staged fit, cyclic single-term refits, then a full polish."""
    order = ["p"] * (model.t - 2) + ["T"]
    rng.shuffle(order)
    U, target = np.zeros(0), y
    for n_terms in range(1, len(order) + 1):
        proj = _Projected(model, y, order[:n_terms])
        U = np.concatenate([U, _screened_direction(proj, rng, target, order[n_terms - 1], candidates)])
        U, res = proj.optimize(U)
        target = y - sum(proj.contributions(U)[0])
    for _ in range(sweeps):
        if res < tol:
            break
        for j in rng.permutation(len(order)):
            parts, _ = proj.contributions(U)
            rest = y - sum(p for i, p in enumerate(parts) if i != j)
            trial = U.reshape(len(order), model.k).copy()
            trial[j] = _screened_direction(proj, rng, rest, order[j], candidates)
            trial, trial_res = proj.optimize(trial.ravel())
            if trial_res < res:
                U, res = trial, trial_res
            if res < tol:
                break
    theta = proj.to_theta(U)
    if theta is None:
        return rng.standard_normal(model.n_params), float("inf")
    # to_theta lists power blocks first and the tangent pair last, as Phi expects
    sol = least_squares(
        lambda th: model.phi(th) - y, theta, jac=model.jacobian, method=_METHOD,
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=100,
    )
    return sol.x, float(np.linalg.norm(model.phi(sol.x) - y))


def fit(
    f,
    t: int,
    restarts: int = 50,
    seed=0,
    tol: float = DEFAULT_TOL,
    reference=None,
    match_tol: float = DEFAULT_MATCH_TOL,
    m: int | None = None,
    d: int | None = None,
    check_gradient: bool = True,
    candidates: int = 16,
    sweeps: int = 2,
) -> RecoveryResult:
    """Multi-start least-squares fits of ``Phi(theta) = f``.

    ``f`` is a float :class:`DenseForm` (or a coefficient vector with ``m``
    and ``d`` given).  The target is scaled to unit norm; residuals are
    reported relative to ``|f|`` and candidates are returned on the scale of
    ``f``.  ``reference`` is a parameter vector (usually the plant) that
    converged fits are compared against; without it they are compared with
    the first converged fit.

    Each restart adds the t-1 terms one at a time in random order from
    random directions (the best of ``candidates`` Gaussian draws against the
    current residual), optimizing directions by variable projection.  Up to
    ``sweeps`` passes then re-draw one term at a time against the residual of
    the others.  The result is polished by trust-region least squares on
    ``Phi`` with its analytic Jacobian.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if isinstance(f, DenseForm):
        m, d = f.m, f.degree
        target = np.array([float(c) for c in f.coeffs])
    else:
        target = np.asarray(f, dtype=float)
    model = JoinModel(m, d, t)
    if target.shape != (model.n,):
        raise ValueError("target has the wrong number of coefficients")
    if check_gradient:
        err = gradient_check(m, d, t, seed=np.atleast_1d(seed).tolist() + [99])
        if err >= 1e-6:
            raise RuntimeError(f"analytic Jacobian disagrees with finite differences (rel. error {err:.2e})")
    fnorm = float(np.linalg.norm(target))
    if fnorm == 0.0:
        raise ValueError("cannot fit the zero form")
    y = target / fnorm
    unscale = fnorm ** (1.0 / d)

    candidates_out = []
    for r in range(restarts):
        rng = np.random.default_rng(np.atleast_1d(seed).tolist() + [r])
        theta, residual = _one_restart(model, y, rng, tol, candidates, sweeps)
        candidates_out.append((theta * unscale, residual))

    converged = [i for i, (_, r) in enumerate(candidates_out) if r < tol]
    if reference is None and converged:
        reference = candidates_out[converged[0]][0]
    matched_idx, non_matching = [], []
    for i in converged:
        try:
            same = decompositions_match(
                candidates_out[i][0] / unscale, np.asarray(reference, dtype=float) / unscale, m, d, t, match_tol
            )
        except ValueError:
            same = False
        (matched_idx if same else non_matching).append(i)
    if non_matching:
        log.warning("converged fits %s do not match the reference decomposition", non_matching)
    return RecoveryResult(
        m=m,
        d=d,
        t=t,
        restarts=restarts,
        seed=np.atleast_1d(seed).tolist() if not np.isscalar(seed) else seed,
        tol=tol,
        match_tol=match_tol,
        candidates=[([float(x) for x in th], float(r)) for th, r in candidates_out],
        converged_count=len(converged),
        matched_count=len(matched_idx),
        matched=len(converged) > 0 and len(matched_idx) == len(converged),
        red_alert=bool(non_matching),
        non_matching=non_matching,
    )
