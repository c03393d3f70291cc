import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reebverify import oracles
from reebverify.degree import (
    AlmostContactPoint,
    Framing,
    StructureSphere,
    conjugation_path,
    eta_invariance_residual,
    evaluate_almost_contact,
    evaluate_sphere_at_point,
    fit_triple,
    h_extend,
    polar_loop,
    quaternionic_frame,
    roundtrip_identity,
    sphere_degree,
    standard_framing,
    structure_sphere_degree,
)
from reebverify.errors import StructureError
from reebverify.quaternionic import build_quaternionic_triple
from reebverify.suites import random_almost_contact

from .helpers import seeds, unit_rows

TRIPLES = {m: build_quaternionic_triple(m) for m in (1, 2, 3, 4)}


def det_on_plus_i_eigenspace(U, I):
    """``det_C U`` via the ``+i`` eigenspace of ``I`` (independent of the library's complexification)."""
    w, V = np.linalg.eig(I)
    B = V[:, np.abs(w - 1j) < 1e-8]
    return np.linalg.det(np.linalg.pinv(B) @ U @ B)


def test_almost_contact_point_validation():
    v = np.array([0.0, 0.0, 1.0])
    B = np.eye(3)[:, :2]
    j = np.array([[0.0, -1.0], [1.0, 0.0]])
    AlmostContactPoint(v, B, j)
    with pytest.raises(ValueError, match="unit"):
        AlmostContactPoint(2 * v, B, j)
    with pytest.raises(ValueError, match="shape"):
        AlmostContactPoint(v, np.eye(3), j)
    with pytest.raises(ValueError, match="orthonormal"):
        AlmostContactPoint(v, np.eye(3)[:, 1:], j)


@given(seeds, st.sampled_from([3, 7, 11]))
def test_extension_is_orthogonal_complex_structure(seed, k):
    a = random_almost_contact(np.random.default_rng(seed), k)
    M = h_extend(a)
    eye = np.eye(k + 1)
    assert np.abs(M @ M + eye).max() < 1e-12
    assert np.abs(M.T @ M - eye).max() < 1e-12
    # v goes to the new direction, which goes to -v
    t = eye[:, -1]
    v = np.append(a.v, 0.0)
    assert np.allclose(M @ v, t) and np.allclose(M @ t, -v)
    Bx = np.vstack([a.basis, np.zeros((1, k - 1))])
    assert np.allclose(M @ Bx, Bx @ a.j)


@given(seeds, st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_conjugation_identities(seed, theta, phi):
    T = TRIPLES[2]
    P, It = conjugation_path(T, theta, phi)
    J_th = math.cos(theta) * T.J + math.sin(theta) * T.K
    assert np.allclose(It, math.cos(phi) * T.I + math.sin(phi) * J_th, atol=1e-13)
    assert np.allclose(P.T @ P, np.eye(T.dim), atol=1e-13)


def test_conjugation_at_pi_is_complex_rotation_times_j():
    T = TRIPLES[1]
    for th in np.linspace(0, 2 * np.pi, 9):
        P, _ = conjugation_path(T, th, np.pi)
        assert np.allclose(P, (math.cos(th) * np.eye(4) + math.sin(th) * T.I) @ T.J, atol=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_polar_loop_is_scalar_rotation(m):
    T = TRIPLES[m]
    loop = polar_loop(T, 65)
    thetas = np.linspace(0, 2 * np.pi, 65)
    for th, U in zip(thetas[:-1], loop[:-1]):
        assert np.allclose(U, math.cos(th) * np.eye(T.dim) + math.sin(th) * T.I, atol=1e-13)
    assert np.array_equal(loop[0], loop[-1])


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_degree_is_twice_quaternionic_dimension(m):
    T = TRIPLES[m]
    assert sphere_degree(T) == 2 * m
    dets = [det_on_plus_i_eigenspace(U, T.I) for U in polar_loop(T, 256)]
    assert round(oracles.unwrap_winding(dets)) == 2 * m


@pytest.mark.parametrize("res", [64, 100, 128, 512, 1024])
def test_degree_independent_of_resolution(res):
    assert sphere_degree(TRIPLES[3], res) == 6


def test_degree_rejects_coarse_resolution():
    with pytest.raises(ValueError):
        sphere_degree(TRIPLES[1], 32)


def test_standard_framing_coordinates_are_identity():
    fr = standard_framing(6)
    assert np.array_equal(fr.coordinates, np.eye(6))
    assert fr.gram_determinant() == 1.0
    with pytest.raises(ValueError):
        Framing(np.ones(3), np.eye(3))


@pytest.mark.parametrize("m", [1, 2, 3])
def test_quaternionic_frame_spans_invariant_subspace(m, rng):
    T = TRIPLES[m]
    for q in unit_rows(rng, 3, T.dim):
        fr = quaternionic_frame(T, q)
        assert fr.eta.shape == (T.dim, m - 1)
        assert fr.tau.shape == (T.dim, 4 * (m - 1))
        assert eta_invariance_residual(T, fr) < 1e-12
        tt = fr.tau_tilde
        assert np.abs(tt.T @ tt - np.eye(T.dim - 1)).max() < 1e-12
        assert np.abs(tt.T @ fr.q).max() < 1e-12


@pytest.mark.parametrize("m", [1, 2])
def test_evaluated_sphere_has_the_triple_degree(m, rng):
    T = TRIPLES[m]
    frame = quaternionic_frame(T, unit_rows(rng, 1, T.dim)[0])
    sphere = evaluate_sphere_at_point(T, frame, np.linspace(0, 2 * np.pi, 6), np.linspace(0.1, 3.0, 5))
    assert sphere.max_structure_defect() < 1e-12
    _, resid = fit_triple(sphere)
    assert resid < 1e-12
    assert structure_sphere_degree(sphere) == 2 * m


def test_constant_sphere_has_degree_zero():
    I = TRIPLES[1].I
    grid = np.broadcast_to(I, (4, 3, 4, 4)).copy()
    assert structure_sphere_degree(StructureSphere(np.zeros(4), np.zeros(3), grid)) == 0


def test_nonlinear_sphere_is_rejected():
    T = TRIPLES[1]
    th, ph = np.linspace(0, 6, 5), np.linspace(0.1, 3, 4)
    grid = np.empty((5, 4, 4, 4))
    for a, t in enumerate(th):
        for b, f in enumerate(ph):
            grid[a, b] = T.I if (a + b) % 2 else T.J
    with pytest.raises(StructureError):
        structure_sphere_degree(StructureSphere(th, ph, grid))


def test_evaluated_structure_is_the_plane_restriction(rng):
    T = TRIPLES[2]
    frame = quaternionic_frame(T, unit_rows(rng, 1, T.dim)[0])
    a = evaluate_almost_contact(T.K, frame)
    tt = frame.tau_tilde
    R = -T.K @ frame.q
    assert np.allclose(tt @ a.v, R)
    Z = tt @ a.basis
    assert np.abs(Z.T @ (T.K @ frame.q)).max() < 1e-12
    assert np.allclose(Z @ a.j, T.K @ Z, atol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_roundtrip_is_identity_at_standard_point(m):
    for j in TRIPLES[m].as_tuple():
        c, dist = roundtrip_identity(j)
        assert dist < 1e-12
        cc, _ = roundtrip_identity(c)
        assert np.abs(cc - c).max() < 1e-12


def test_roundtrip_at_other_frames_is_a_complex_structure(rng):
    T = TRIPLES[2]
    frame = quaternionic_frame(T, unit_rows(rng, 1, T.dim)[0])
    c, _ = roundtrip_identity(T.J, frame)
    assert np.abs(c @ c + np.eye(T.dim)).max() < 1e-12


def test_degenerate_framing_is_rejected():
    fr = Framing(np.eye(4)[:, 3], np.zeros((4, 3)))
    with pytest.raises(StructureError):
        evaluate_almost_contact(TRIPLES[1].I, fr)
