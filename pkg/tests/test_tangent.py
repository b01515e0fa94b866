import numpy as np
import pytest

from taucert.domains import RATIONAL, prime_field
from taucert.forms import Params, apolar_pairing, tangent_form
from taucert.interp import assemble, random_kernel_form
from taucert.linalg import rank_rational
from taucert.schemes import SchemeError
from taucert.tangent import (
    TangentVectorNu,
    affine_rank,
    duality_check,
    duality_report,
    duality_scheme,
    frame_tau,
    frame_X,
    join_data,
    join_dimension_sigma,
    join_dimension_tau,
    tau_join_frames,
)


def test_frame_ranks():
    assert affine_rank(frame_X((1, 2, 3), 5, RATIONAL), RATIONAL) == 3
    nu = TangentVectorNu((1, 2, 3), (0, 1, -1))
    # the tangent developable is a 2m-dimensional variety: affine cone tangent space 2m+1
    assert affine_rank(frame_tau(nu, 5, RATIONAL), RATIONAL) == 5
    with pytest.raises(SchemeError):
        frame_tau(TangentVectorNu((1, 2, 3), (2, 4, 6)), 5, RATIONAL)
    with pytest.raises(ValueError):
        frame_X((0, 0, 0), 4, RATIONAL)


@pytest.mark.parametrize("m,d", [(2, 4), (2, 7), (3, 5), (4, 4)])
def test_tangential_variety_dimension(m, d):
    assert join_dimension_tau(m, d, 2, seed=1) == 2 * m


@pytest.mark.parametrize(
    "m,d,t,expected",
    [(2, 4, 5, 13), (2, 4, 4, 11), (3, 4, 9, 33), (4, 3, 7, 33), (2, 5, 7, 20), (2, 3, 1, 2)],
)
def test_secant_dimensions_alexander_hirschowitz(m, d, t, expected):
    # the defective cases are one short of min(N, t(m+1)-1)
    assert join_dimension_sigma(m, d, t, seed=0) == expected


@pytest.mark.parametrize("m,d,t", [(2, 7, 2), (2, 7, 3), (2, 7, 8), (3, 7, 7), (5, 6, 11)])
def test_tau_join_nondefective(m, d, t):
    assert join_dimension_tau(m, d, t, seed=3) == Params(m, d).expected_dim_tau(t)


def test_tangent_point_lies_in_its_frame():
    d = 5
    nu = TangentVectorNu((1, -1, 2), (3, 0, 1))
    frame = frame_tau(nu, d, RATIONAL)
    g = tangent_form(nu.v, nu.w, d, RATIONAL)
    stacked = np.vstack([frame.matrix(), g.coeffs])
    assert rank_rational(stacked) == rank_rational(frame.matrix())


def test_duality_report_spans_equal():
    r = duality_report(2, 7, 3, seed=0)
    assert (r.primal_dim, r.dual_dim, r.joint_rank) == (7, 7, 8)
    assert r.spans_equal


@pytest.mark.parametrize("seed", range(4))
def test_duality_check(seed):
    assert duality_check(3, 6, 4, seed=seed)


def test_join_data_deterministic():
    a = join_data(2, 3, 5, prime_field(101))
    assert a == join_data(2, 3, 5, prime_field(101))
    assert len(tau_join_frames(a, 4)) == 4


def test_apolar_annihilation_of_frame():
    # a form in the dual system pairs to zero with every frame generator
    dom = prime_field(10007)
    data = join_data(2, 1, 2, dom)
    F = random_kernel_form(assemble(duality_scheme(data), 6), np.random.default_rng(0))
    for frame in tau_join_frames(data, 6):
        assert all(apolar_pairing(F, g) == 0 for g in frame.generators)


def test_tau_frame_contains_X_frame_and_is_scale_free():
    v, w = (1, -1, 2), (3, 0, 1)
    T = frame_tau(TangentVectorNu(v, w), 7, RATIONAL).matrix()
    X = frame_X(v, 7, RATIONAL).matrix()
    assert rank_rational(np.vstack([T, X])) == rank_rational(T) == 5
    T2 = frame_tau(TangentVectorNu(tuple(2 * x for x in v), tuple(-7 * x for x in w)), 7, RATIONAL).matrix()
    assert rank_rational(np.vstack([T, T2])) == rank_rational(T2) == 5


@pytest.mark.parametrize("m,d", [(2, 7), (3, 6)])
def test_join_dimensions_monotone_and_divisorial(m, d):
    P = Params(m, d)
    tau = {t: join_dimension_tau(m, d, t, seed=t) for t in range(2, P.beta + 3)}
    sigma = {t: join_dimension_sigma(m, d, t, seed=t) for t in range(1, P.beta + 3)}
    for t in range(2, P.beta + 3):
        assert tau[t] <= min(P.N, t * (m + 1) - 2)
        assert sigma[t - 1] <= tau[t] <= sigma[t]
        if t > 2:
            assert tau[t - 1] <= tau[t]
        if tau[t] == P.expected_dim_tau(t) and sigma[t] == P.expected_dim_sigma(t) and sigma[t] < P.N:
            assert sigma[t] - tau[t] == 1
