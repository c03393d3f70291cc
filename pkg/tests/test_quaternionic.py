import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reebverify import oracles
from reebverify.errors import AliasingError, NotCommutingError, StructureError
from reebverify.quaternionic import (
    SphereDirection,
    build_quaternionic_triple,
    check_complex_structure,
    combine,
    complex_basis,
    complexify,
    det_winding,
    exp_scaled_structure,
    realify,
    sphere_direction,
    unitary_loop,
)

from .helpers import angles, directions, seeds


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_triple_relations_hold_exactly(m):
    T = build_quaternionic_triple(m)
    assert T.dim == 4 * m
    assert max(T.relation_residuals().values()) == 0.0


def test_triple_m1_squares():
    T = build_quaternionic_triple(1)
    for M in T.as_tuple():
        assert np.array_equal(M @ M, -np.eye(4))


def test_triple_m2_ij_minus_k_by_explicit_product():
    T = build_quaternionic_triple(2)
    prod = np.zeros((8, 8))
    for a in range(8):
        for b in range(8):
            prod[a, b] = sum(T.I[a, c] * T.J[c, b] for c in range(8))
    assert np.abs(prod - T.K).max() == 0.0


def test_triple_m3_anticommute():
    T = build_quaternionic_triple(3)
    assert np.array_equal(T.I @ T.J + T.J @ T.I, np.zeros((12, 12)))


@pytest.mark.parametrize("bad", [0, -1, 1.5])
def test_triple_rejects_invalid_dimension(bad):
    with pytest.raises(ValueError):
        build_quaternionic_triple(bad)


def test_triple_is_block_diagonal():
    T = build_quaternionic_triple(2)
    assert np.array_equal(T.I[:4, 4:], np.zeros((4, 4)))
    assert np.array_equal(T.I[:4, :4], T.I[4:, 4:])


def test_combine_basis_directions():
    T = build_quaternionic_triple(1)
    assert np.array_equal(combine(T, SphereDirection(1, 0, 0)), T.I)
    assert np.array_equal(combine(T, (0.0, 0.0, 1.0)), T.K)


def test_combine_diagonal_direction_squares_to_minus_id():
    T = build_quaternionic_triple(1)
    C = combine(T, np.ones(3) / math.sqrt(3))
    assert np.abs(C @ C + np.eye(4)).max() < 1e-14


def test_combine_rejects_non_unit():
    T = build_quaternionic_triple(1)
    with pytest.raises(ValueError):
        combine(T, (1.0, 1.0, 0.0))
    with pytest.raises(ValueError):
        combine(T, (1.0, 0.0))


def test_combine_broadcasts_over_stacks():
    T = build_quaternionic_triple(1)
    E = sphere_direction(np.array([0.0, 1.0]), np.array([0.5, 2.0]))
    C = combine(T, E)
    assert C.shape == (2, 4, 4)
    assert np.allclose(C[1], combine(T, E[1]))


@given(directions(), st.integers(1, 3))
def test_combined_structure_squares_to_minus_id(e, m):
    T = build_quaternionic_triple(m)
    C = combine(T, e)
    assert np.abs(C @ C + np.eye(4 * m)).max() < 1e-13
    assert np.abs(C + C.T).max() < 1e-15


def test_sphere_direction_from_angles():
    d = SphereDirection.from_angles(0.3, 1.1)
    assert np.allclose(d.vector, sphere_direction(0.3, 1.1))
    assert np.linalg.norm(d.vector) == pytest.approx(1.0)
    assert np.allclose(sphere_direction(0.7, 0.0), [0, 0, 1])


def test_exp_at_zero_is_identity():
    T = build_quaternionic_triple(1)
    assert np.array_equal(exp_scaled_structure(T.I, 0.0), np.eye(4))


def test_exp_quarter_turn_of_i_is_i():
    T = build_quaternionic_triple(1)
    E = exp_scaled_structure(T.I, math.pi / 2)
    assert np.abs(E - oracles.series_exp(T.I, math.pi / 2)).max() < 1e-12
    assert np.abs(E - T.I).max() < 1e-15


def test_exp_of_half_structure_at_pi_is_j():
    T = build_quaternionic_triple(1)
    F = 0.5 * (-math.sin(0.0) * T.I + math.cos(0.0) * T.J)
    E = exp_scaled_structure(F, math.pi)
    assert np.abs(E - oracles.series_exp(F, math.pi)).max() < 1e-12
    assert np.abs(E - 2 * F).max() < 1e-15
    assert np.abs(E - T.J).max() < 1e-15


def test_exp_infers_scale_and_rejects_non_structures():
    T = build_quaternionic_triple(1)
    assert np.allclose(exp_scaled_structure(3 * T.K, 0.2), exp_scaled_structure(3 * T.K, 0.2, c=3.0))
    with pytest.raises(StructureError):
        exp_scaled_structure(np.diag([1.0, 2.0, 3.0, 4.0]), 1.0)
    with pytest.raises(StructureError):
        exp_scaled_structure(T.I + 0.1 * np.eye(4) @ T.J @ T.J, 1.0, c=1.0)


@given(seeds, st.floats(-2 * math.pi, 2 * math.pi), st.integers(1, 2))
def test_exp_matches_series_oracle(seed, t, m):
    rng = np.random.default_rng(seed)
    e = rng.normal(size=3)
    c = rng.uniform(0.5, 1.5)
    F = c * combine(build_quaternionic_triple(m), e / np.linalg.norm(e))
    E = exp_scaled_structure(F, t, c)
    assert np.abs(E - oracles.series_exp(F, t)).max() < 1e-12
    assert np.abs(E.T @ E - np.eye(4 * m)).max() < 1e-13


def test_check_complex_structure_rejects_symmetric():
    with pytest.raises(StructureError):
        check_complex_structure(np.eye(4))


def test_complex_basis_is_adapted():
    I = build_quaternionic_triple(2).I
    E = complex_basis(I)
    assert np.abs(E.T @ E - np.eye(8)).max() < 1e-14
    assert np.abs(I @ E[:, 0::2] - E[:, 1::2]).max() < 1e-14


def test_complexify_identity_and_structure():
    I = build_quaternionic_triple(2).I
    assert np.allclose(complexify(np.eye(8), I), np.eye(4))
    assert np.allclose(complexify(I, I), 1j * np.eye(4))


@given(angles, st.integers(1, 3))
def test_complexify_rotation_is_phase(theta, m):
    I = build_quaternionic_triple(m).I
    A = math.cos(theta) * np.eye(4 * m) + math.sin(theta) * I
    Z = complexify(A, I)
    assert np.abs(Z - np.exp(1j * theta) * np.eye(2 * m)).max() < 1e-13
    assert np.abs(realify(Z, I) - A).max() < 1e-13


def test_complexify_names_commutator_norm():
    T = build_quaternionic_triple(1)
    with pytest.raises(NotCommutingError, match="commute"):
        complexify(T.J, T.I)


def test_winding_constant_loop_is_zero():
    I = build_quaternionic_triple(1).I
    assert det_winding([np.eye(4)] * 10, I) == 0


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_winding_of_circle_loop_is_2m(m):
    I = build_quaternionic_triple(m).I
    assert det_winding(unitary_loop(I), I) == 2 * m


def test_winding_resampling_invariant():
    I = build_quaternionic_triple(2).I
    assert det_winding(unitary_loop(I, 256), I) == det_winding(unitary_loop(I, 512), I)


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_winding_is_additive_under_products(a, b):
    I = build_quaternionic_triple(1).I
    th = np.linspace(0, 2 * np.pi, 400)
    L1 = [np.cos(a * t) * np.eye(4) + np.sin(a * t) * I for t in th]
    L2 = [np.cos(b * t) * np.eye(4) + np.sin(b * t) * I for t in th]
    L1[-1], L2[-1] = L1[0], L2[0]
    w = det_winding([x @ y for x, y in zip(L1, L2)], I)
    assert w == det_winding(L1, I) + det_winding(L2, I) == 2 * (a + b)


def test_winding_rejects_open_and_aliased_loops():
    I = build_quaternionic_triple(1).I
    th = np.linspace(0, np.pi, 50)
    with pytest.raises(ValueError, match="close"):
        det_winding([np.cos(t) * np.eye(4) + np.sin(t) * I for t in th], I)
    coarse = unitary_loop(I, 5)
    with pytest.raises(AliasingError):
        det_winding(coarse, I)
