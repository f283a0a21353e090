import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carlequil.carleman import field_matrix
from carlequil.models import (
    ChainModel,
    SpringParams,
    TrussModel,
    chain_field,
    chain_load,
    chain_operators,
    chain_potential,
    chain_rhs_elementwise,
    exact_edge_energy,
    spring_potential,
    truss_edge_energy,
    truss_potential,
    two_bay_truss,
)
from carlequil.oracle import cubic_root
from carlequil.polysys import Polynomial, gradient


def test_spring_params_validation():
    with pytest.raises(ValueError):
        SpringParams(k=0.0)
    with pytest.raises(ValueError):
        SpringParams(a=-1.0)


def test_spring_potential_value():
    U = spring_potential(SpringParams(10.0, 3000.0, 0.2))
    u = 0.0182
    assert U([u]) == pytest.approx(5.0 * u**2 + 750.0 * u**4 - 0.2 * u, rel=1e-14)
    assert U([u]) == pytest.approx(-1.9015e-3, rel=1e-3)
    assert spring_potential(SpringParams(10.0, 3000.0, 0.0))([0.0]) == 0.0


def test_spring_gradient_vanishes_at_root():
    p = SpringParams(10.0, 3000.0, 0.2)
    (g,) = gradient(spring_potential(p))
    assert abs(g([cubic_root(p.k, p.a, p.b)])) <= 1e-10


def test_chain_load_pattern():
    np.testing.assert_array_equal(chain_load(8, 0.3), [0.3] * 4 + [-0.3] * 4)
    with pytest.raises(ValueError):
        chain_load(5, 0.1)


def test_chain_validation():
    with pytest.raises(ValueError):
        ChainModel(1)
    with pytest.raises(ValueError):
        ChainModel(4, b=(1.0, 2.0))
    assert ChainModel(3).b == (0.0, 0.0, 0.0)


def test_chain_translation_is_equilibrium():
    f = chain_field(ChainModel(8, 10.0, 3000.0))
    np.testing.assert_allclose(f(np.full(8, 0.37)), 0.0, atol=1e-12)


def test_chain_field_at_rest_is_load():
    m = ChainModel.split_load(8, 0.3)
    np.testing.assert_allclose(chain_field(m)(np.zeros(8)), chain_load(8, 0.3), rtol=0, atol=0)


def test_chain_elementwise_identity():
    rng = np.random.default_rng(2)
    m = ChainModel(8, 10.0, 3000.0, tuple(rng.uniform(-1, 1, 8)))
    f = chain_field(m)
    for _ in range(100):
        u = rng.uniform(-0.3, 0.3, 8)
        assert np.max(np.abs(f(u) - chain_rhs_elementwise(m, u))) <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_shift_operators_match_field(n):
    rng = np.random.default_rng(n)
    m = ChainModel(n, 3.0, 40.0, tuple(rng.uniform(-1, 1, n)))
    F0, F1, F3 = chain_operators(m)
    f = chain_field(m)
    np.testing.assert_allclose(F1, field_matrix(f, 1).toarray(), atol=1e-14)
    for _ in range(5):
        u = rng.uniform(-1, 1, n)
        u3 = np.kron(np.kron(u, u), u)
        np.testing.assert_allclose(F0[:, 0] + F1 @ u + F3 @ u3, f(u), atol=1e-11)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**31))
def test_force_balance(n, seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n)
    b -= b.mean()
    m = ChainModel(n, *rng.uniform(0, 10, 2), tuple(b))
    u = rng.uniform(-1, 1, n)
    assert abs(chain_field(m)(u).sum()) <= 1e-9 * (1 + m.a)


def test_axial_identity():
    k, a = 10.0, 3000.0
    for eps in (1e-3, 0.02, 0.1, 0.5):
        U = truss_edge_energy(1.0, 0.0, k, a)
        assert U([eps, 0.0]) == pytest.approx(0.5 * k * eps**2 + 0.25 * a * eps**4, rel=1e-12, abs=1e-15)


def test_axial_identity_coefficients():
    U = truss_edge_energy(1.0, 0.0, 10.0, 3000.0)
    # with v = 0 only u^2 and u^4 survive
    terms = {e: c for e, c in U.terms.items() if all(var == 0 for var, _ in e)}
    assert terms.keys() == {((0, 2),), ((0, 4),)}
    assert terms[((0, 2),)] == pytest.approx(5.0, rel=1e-15)
    assert terms[((0, 4),)] == pytest.approx(750.0, rel=1e-15)


def test_edge_energy_at_rest():
    assert truss_edge_energy(0.3, -1.2, 10.0, 3000.0)([0.0, 0.0]) == 0.0


def test_transverse_quartic_coefficient():
    k = 10.0
    U = truss_edge_energy(1.0, 0.0, k, 0.0)
    assert U.coefficient({1: 4}) == pytest.approx(k / 8, rel=1e-15)
    eps = 1e-3
    assert U([0.0, eps]) == pytest.approx(exact_edge_energy(1.0, 0.0, k, 0.0, 0.0, eps), rel=1e-5)


def test_zero_length_edge():
    with pytest.raises(ValueError):
        truss_edge_energy(0.0, 0.0, 1.0, 1.0)


def test_exact_edge_energy_matches_naive_form():
    rng = np.random.default_rng(3)
    for _ in range(20):
        x, y, u, v = rng.uniform(-1, 1, 4)
        L0 = math.hypot(x, y)
        dL = math.hypot(x + u, y + v) - L0
        assert exact_edge_energy(x, y, 2.0, 5.0, u, v) == pytest.approx(dL**2 + 1.25 * dL**4, rel=1e-10)


def test_fifth_order_approximation():
    rng = np.random.default_rng(20240601)
    k, a = 10.0, 3000.0
    epsilons = (1e-1, 1e-2, 1e-3)
    for _ in range(50):
        L = rng.uniform(0.5, 2.0)
        theta = rng.uniform(0, 2 * np.pi)
        x, y = L * math.cos(theta), L * math.sin(theta)
        phi = rng.uniform(0, 2 * np.pi)
        d = np.array([math.cos(phi), math.sin(phi)])
        U = truss_edge_energy(x, y, k, a)
        errs = [abs(exact_edge_energy(x, y, k, a, *(e * d)) - U(e * d)) for e in epsilons]
        for e1, e2 in zip(errs, errs[1:]):
            ratio = e1 / e2
            assert 1e4 <= ratio <= 1e6, (x, y, d, errs)


def test_two_bay_truss_layout():
    m = two_bay_truss(0.3)
    assert m.n_dof == 8
    assert m.free_nodes == [2, 3, 4, 5]
    assert m.forces == {4: (0.3, 0.0)}
    assert len(m.edges) == 9
    assert {(0, 3), (2, 5)} <= set(m.edges)


def test_truss_rest_state_is_equilibrium():
    U = truss_potential(two_bay_truss(0.0))
    z = np.zeros(8)
    assert U(z) == 0.0
    assert all(g(z) == 0.0 for g in gradient(U))


def test_truss_edges_deduplicated():
    m = TrussModel([(0, 0), (1, 0), (0, 1)], [(0, 1), (1, 0), (1, 2), (0, 2)], {0, 2})
    assert m.edges == [(0, 1), (1, 2), (0, 2)]


def test_truss_validation():
    with pytest.raises(ValueError):
        TrussModel([(0, 0), (0, 0)], [(0, 1)])
    with pytest.raises(ValueError):
        TrussModel([(0, 0), (1, 0)], [(0, 2)])
    with pytest.raises(ValueError):
        TrussModel([(0, 0), (1, 0)], [(0, 1)], fixed={5})


def test_force_on_fixed_node_warns():
    m = two_bay_truss(0.3)
    m.forces = {0: (1.0, 0.0), 4: (0.3, 0.0)}
    with pytest.warns(UserWarning, match="fixed node 0"):
        U = truss_potential(m)
    assert U == truss_potential(two_bay_truss(0.3))


def test_mechanism_rejected():
    # a single pinned bar leaves the free node with zero transverse stiffness
    m = TrussModel([(0, 0), (1, 0)], [(0, 1)], {0}, {1: (0.1, 0.0)})
    with pytest.raises(ValueError, match="mechanism"):
        truss_potential(m)


def test_node_displacements_expansion():
    m = two_bay_truss(0.1)
    q = np.arange(8, dtype=float)
    disp = m.node_displacements(q)
    np.testing.assert_array_equal(disp[:2], 0.0)
    np.testing.assert_array_equal(disp[2:].ravel(), q)


@pytest.mark.parametrize(
    "U",
    [
        spring_potential(SpringParams(10.0, 3000.0, 1.0)),
        chain_potential(ChainModel.split_load(4, 0.3)),
        truss_potential(two_bay_truss(0.9)),
    ],
    ids=["spring", "chain", "truss"],
)
def test_coercive_along_strained_directions(U):
    rng = np.random.default_rng(4)
    for _ in range(10):
        d = rng.standard_normal(U.dimension)
        d /= np.linalg.norm(d)
        assert U(1e3 * d) > 1e6
