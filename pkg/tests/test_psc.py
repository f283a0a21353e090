from math import comb

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from carlequil.carleman import LiftedSystem, assemble_dense, lifted_matvec
from carlequil.integrate import IntegratorConfig, integrate_lifted
from carlequil.models import ChainModel, SpringParams, chain_field, spring_field
from carlequil.oracle import cubic_root
from carlequil.psc import pivot_closure, psc_assemble, taylor_closure

x, s_ = sympy.symbols("x s")


def sympy_closure(q, P, s):
    """Coefficients of the degree-P Taylor polynomial of x**q about s."""
    poly = sympy.series(x**q, x, s_, P + 1).removeO()
    poly = sympy.Poly(sympy.expand(poly.subs(s_, s)), x)
    return np.array([float(poly.coeff_monomial(x**m)) for m in range(P + 1)])


def test_q6_example():
    s = 0.37
    expected = [-(s**6), 6 * s**5, -15 * s**4, 20 * s**3, -15 * s**2, 6 * s]
    np.testing.assert_allclose(taylor_closure(6, 5, s), expected, rtol=1e-13)


def test_q7_example():
    s = 0.37
    expected = [-6 * s**7, 35 * s**6, -84 * s**5, 105 * s**4, -70 * s**3, 21 * s**2]
    np.testing.assert_allclose(taylor_closure(7, 5, s), expected, rtol=1e-13)


@pytest.mark.parametrize("q,P", [(4, 2), (6, 5), (7, 5), (9, 4), (10, 6)])
def test_against_sympy_series(q, P):
    for s in (0.01, 0.5, -1.3):
        np.testing.assert_allclose(taylor_closure(q, P, s), sympy_closure(q, P, s), rtol=1e-12, atol=1e-300)


def test_zero_pivot_is_zero():
    for q in range(6, 12):
        assert not np.any(taylor_closure(q, 5, 0.0))


def test_rejects_q_not_above_order():
    with pytest.raises(ValueError):
        taylor_closure(5, 5, 0.1)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.floats(-1, 1), st.floats(-0.1, 0.1))
def test_remainder_bound(P, extra, s, dx):
    q = P + extra
    xv = s + dx
    c = taylor_closure(q, P, s)
    approx = sum(c[m] * xv**m for m in range(P + 1))
    bound = comb(q, P + 1) * abs(dx) ** (P + 1) * max(abs(xv), abs(s)) ** (q - P - 1)
    roundoff = 1e-13 * sum(abs(c[m] * xv**m) for m in range(P + 1))
    assert abs(xv**q - approx) <= bound * (1 + 1e-9) + roundoff


def test_psc_rows_symbolic_form():
    k, a, b, s = 10.0, 3000.0, 0.2, 0.01
    A = assemble_dense(psc_assemble(spring_field(SpringParams(k, a, b)), 5, s))
    row4 = [4 * a * s**6, -24 * a * s**5, 60 * a * s**4, 4 * b - 80 * a * s**3, -4 * k + 60 * a * s**2, -24 * a * s]
    row5 = [30 * a * s**7, -175 * a * s**6, 420 * a * s**5, -525 * a * s**4, 5 * b + 350 * a * s**3,
            -5 * k - 105 * a * s**2]
    np.testing.assert_allclose(A[4], row4, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(A[5], row5, rtol=1e-12, atol=1e-14)


def test_psc_lower_rows_match_carleman():
    f = spring_field(SpringParams(10.0, 3000.0, 0.2))
    A = assemble_dense(psc_assemble(f, 5, 0.01))
    C = assemble_dense(LiftedSystem(f, 5))
    np.testing.assert_array_equal(A[:4], C[:4])


def test_psc_zero_pivot_identical_to_carleman():
    f = spring_field(SpringParams(10.0, 3000.0, 0.7))
    np.testing.assert_array_equal(assemble_dense(psc_assemble(f, 5, 0.0)), assemble_dense(LiftedSystem(f, 5)))
    cfg = IntegratorConfig()
    a = integrate_lifted(psc_assemble(f, 5, 0.0), [0.0], cfg)
    c = integrate_lifted(LiftedSystem(f, 5), [0.0], cfg)
    np.testing.assert_array_equal(a.states, c.states)
    assert a.status == c.status


def test_closure_exact_on_pivot_state():
    # at y = lift(s) the closed rows reproduce the untruncated derivative
    f = spring_field(SpringParams(10.0, 3000.0, 0.5))
    s = 0.03
    sys = psc_assemble(f, 5, s)
    y_full = s ** np.arange(8)
    dy = lifted_matvec(sys, y_full[:6])
    expected = [0.0] + [p * (0.5 * s ** (p - 1) - 10 * s**p - 3000 * s ** (p + 2)) for p in range(1, 6)]
    np.testing.assert_allclose(dy, expected, rtol=1e-10, atol=1e-14)


def test_pivot_closure_lists_needed_powers():
    c = pivot_closure(spring_field(SpringParams()), 5, 0.01)
    assert sorted(c.coefficients) == [6, 7]


def test_psc_rejects_vector_fields():
    with pytest.raises(ValueError):
        psc_assemble(chain_field(ChainModel.split_load(2, 0.1)))


def test_psc_recovers_beyond_carleman_limit():
    sp_ = SpringParams(10.0, 3000.0, 1.5)
    traj = integrate_lifted(psc_assemble(spring_field(sp_), 5, 0.01), [0.0], IntegratorConfig())
    assert not traj.diverged
    exact = cubic_root(10.0, 3000.0, 1.5)
    assert abs(traj.final[0] - exact) <= 0.05 * exact
