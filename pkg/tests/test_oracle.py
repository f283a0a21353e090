import numpy as np
import pytest

from carlequil.integrate import IntegratorConfig, integrate_nonlinear
from carlequil.models import (
    ChainModel,
    SpringParams,
    chain_field,
    chain_potential,
    spring_field,
    spring_potential,
    truss_potential,
    two_bay_truss,
)
from carlequil.oracle import OracleError, cubic_root, solve_equilibrium
from carlequil.polysys import Polynomial, gradient


def bisect_root(k, a, b, iters=200):
    lo, hi = 0.0, b / k
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if k * mid + a * mid**3 - b > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_cubic_linear_case():
    assert cubic_root(10.0, 0.0, 0.2) == 0.02


def test_cubic_reference_case():
    u = cubic_root(10.0, 3000.0, 0.2)
    assert abs(10 * u + 3000 * u**3 - 0.2) <= 1e-12
    assert u == pytest.approx(bisect_root(10.0, 3000.0, 0.2), rel=1e-14)
    assert u == pytest.approx(0.0181934, rel=1e-6)


def test_cubic_zero_force():
    assert cubic_root(10.0, 3000.0, 0.0) == 0.0


def test_cubic_rejects_bad_parameters():
    with pytest.raises(ValueError):
        cubic_root(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        cubic_root(1.0, 1.0, -1.0)


def test_cubic_against_bisection():
    rng = np.random.default_rng(9)
    for _ in range(200):
        k, a, b = rng.uniform(0.1, 10), rng.uniform(0, 1e4), rng.uniform(0, 5)
        assert cubic_root(k, a, b) == pytest.approx(bisect_root(k, a, b), rel=1e-13, abs=1e-300)


def test_newton_matches_cubic_root():
    rng = np.random.default_rng(10)
    for _ in range(50):
        k, a, b = rng.uniform(0.1, 20), rng.uniform(0, 5000), rng.uniform(0, 2)
        res = solve_equilibrium(spring_potential(SpringParams(k, a, b)))
        assert abs(res.u_star[0] - cubic_root(k, a, b)) <= 1e-10
        assert res.residual <= 1e-10


def test_spring_reference_equilibrium():
    res = solve_equilibrium(spring_potential(SpringParams(10.0, 3000.0, 0.2)))
    assert res.u_star[0] == pytest.approx(0.0182, abs=5e-5)
    assert res.method == "newton"


def test_unloaded_chain_stays_at_rest():
    res = solve_equilibrium(chain_potential(ChainModel(8, 10.0, 3000.0)))
    np.testing.assert_array_equal(res.u_star, 0.0)
    assert res.iterations == 0


def test_chain_residual_and_symmetry():
    U = chain_potential(ChainModel.split_load(8, 0.3))
    res = solve_equilibrium(U)
    g = np.array([gi(res.u_star) for gi in gradient(U)])
    assert np.max(np.abs(g)) <= 1e-10
    np.testing.assert_allclose(res.u_star[4:], -res.u_star[:4], atol=1e-12)


def test_truss_suppression_at_large_load():
    nl = two_bay_truss(0.9)
    lin = nl.with_params(a=0.0)
    idx = nl.dof_index()[4]
    u_nl = solve_equilibrium(truss_potential(nl)).u_star[idx]
    u_lin = solve_equilibrium(truss_potential(lin)).u_star[idx]
    assert 0 < u_nl < u_lin


@pytest.mark.parametrize(
    "f",
    [spring_field(SpringParams(10.0, 3000.0, 0.8)), chain_field(ChainModel.split_load(8, 0.2))],
    ids=["spring", "chain"],
)
def test_flow_reaches_oracle(f):
    traj = integrate_nonlinear(f, np.zeros(f.dimension), IntegratorConfig(t_end=20.0))
    res = solve_equilibrium(f.potential)
    np.testing.assert_allclose(traj.final, res.u_star, rtol=0, atol=1e-6)


def test_flow_fallback_then_failure():
    u = Polynomial.variable(1, 0)
    # unbounded below: Newton runs away and the flow blows up
    with pytest.raises(OracleError):
        solve_equilibrium(u - u**4, max_iter=20)


def test_flow_fallback_recovers():
    # Newton from the saddle at 0 with too few iterations, then the flow lands near the minimum
    u = Polynomial.variable(1, 0)
    U = 0.25 * u**4 - 0.5 * u**2 - 0.1 * u
    res = solve_equilibrium(U, max_iter=2)
    assert res.method == "flow+newton"
    assert res.residual <= 1e-10
    assert res.u_star[0] > 1.0


def test_initial_guess_length_checked():
    with pytest.raises(ValueError):
        solve_equilibrium(spring_potential(SpringParams()), u0=[0.0, 1.0])
