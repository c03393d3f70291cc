import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reebverify import oracles
from reebverify.contact import (
    ContactForm,
    Hamiltonian,
    build_tangent_frame,
    complex_tangencies,
    contact_nondegeneracy,
    contact_plane_frame,
    evaluate_form,
    hamiltonian_flow,
    hamiltonian_residuals,
    hamiltonian_vector_field,
    reeb_field,
    reeb_residuals,
    two_form,
)
from reebverify.errors import NotContactError, StructureError
from reebverify.quaternionic import build_quaternionic_triple, combine, exp_scaled_structure, sphere_direction

from .helpers import directions, seeds, tangent_rows, unit_rows

T1 = build_quaternionic_triple(1)
T2 = build_quaternionic_triple(2)


def test_form_rejects_non_antisymmetric():
    with pytest.raises(StructureError):
        ContactForm(np.eye(4))


def test_evaluate_form_examples(rng):
    p = unit_rows(rng, 1, 4)[0]
    assert evaluate_form(T1.I, p, p) == pytest.approx(0.0, abs=1e-15)
    assert evaluate_form(T1.I, p, -T1.I @ p) == pytest.approx(1.0, abs=1e-14)
    z = contact_plane_frame(T1.I, p)[:, 0]
    assert abs(evaluate_form(T1.I, p, z)) < 1e-12
    with pytest.raises(ValueError):
        evaluate_form(T1.I, p, np.ones(3))


def test_two_form_closed_form_and_antisymmetry(rng):
    p = unit_rows(rng, 1, 4)[0]
    u = tangent_rows(rng, p[None])[0]
    assert two_form(T1.I, p, u, u) == pytest.approx(0.0, abs=1e-15)
    z = contact_plane_frame(T1.I, p)[:, 0]
    assert abs(two_form(T1.I, p, z, T1.I @ z)) == pytest.approx(2.0)


def test_two_form_rejects_non_tangent(rng):
    p = unit_rows(rng, 1, 4)[0]
    with pytest.raises(ValueError, match="tangent"):
        two_form(T1.I, p, p, tangent_rows(rng, p[None])[0])


@given(seeds, st.sampled_from([4, 8]))
def test_two_form_matches_finite_difference_oracle(seed, d):
    rng = np.random.default_rng(seed)
    T = build_quaternionic_triple(d // 4)
    e = rng.normal(size=3)
    A = combine(T, e / np.linalg.norm(e))
    p = unit_rows(rng, 1, d)[0]
    u, v = tangent_rows(rng, np.stack([p, p]))
    val = two_form(A, p, u, v)
    assert val == pytest.approx(oracles.exterior_derivative_fd(A, p, u, v), abs=1e-6)
    assert val == pytest.approx(-two_form(A, p, v, u), abs=1e-15)


def test_tangent_frame_examples(rng):
    F = build_tangent_frame(np.eye(4)[0])
    assert np.abs(np.abs(F.basis) - np.eye(4)[:, 1:]).max() == 0.0
    p = unit_rows(rng, 1, 8)[0]
    F = build_tangent_frame(p)
    assert np.abs(F.basis.T @ F.basis - np.eye(7)).max() < 1e-13
    assert np.abs(F.vectors @ p).max() < 1e-13
    assert F.vectors.shape == (7, 8)


def test_points_must_be_unit():
    with pytest.raises(ValueError, match="unit sphere"):
        reeb_field(T1.I, np.array([1.0, 1.0, 0.0, 0.0]))


def test_reeb_field_closed_form_and_oracle(rng):
    P = unit_rows(rng, 20, 4)
    R = reeb_field(T1.I, P)
    assert np.abs(R + P @ T1.I.T).max() < 1e-12
    for p, r in zip(P, R):
        assert np.abs(r - oracles.reeb_by_lstsq(T1.I, p)).max() < 1e-10
    assert max(reeb_residuals(T1.I, P, R).values()) < 1e-10
    assert np.abs(evaluate_form(T1.I, P, R) - 1.0).max() < 1e-12


@given(directions(), seeds)
def test_reeb_of_combined_form(e, seed):
    A = combine(T2, e)
    P = unit_rows(np.random.default_rng(seed), 10, 8)
    R = reeb_field(A, P)
    assert np.abs(R + P @ A.T).max() < 1e-10
    assert max(reeb_residuals(A, P, R).values()) < 1e-10


def test_reeb_residuals_on_angle_grid(rng):
    P = unit_rows(rng, 30, 8)
    th = np.linspace(0, 2 * np.pi, 10, endpoint=False)
    ph = np.linspace(1e-3, np.pi - 1e-3, 10)
    for e in sphere_direction(th[:, None], ph[None]).reshape(-1, 3):
        A = combine(T2, e)
        assert max(reeb_residuals(A, P, reeb_field(A, P)).values()) < 1e-10


def test_reeb_fails_for_non_contact_form():
    A = np.zeros((4, 4))
    A[0, 1], A[1, 0] = 1.0, -1.0
    with pytest.raises(NotContactError):
        reeb_field(A, np.array([0.0, 0.0, 1.0, 0.0]))


@pytest.mark.parametrize("T, expected", [(T1, 2.0), (T2, 8.0)])
def test_nondegeneracy_is_constant(T, expected, rng):
    P = unit_rows(rng, 50, T.dim)
    pf = contact_nondegeneracy(T.I, P)
    assert np.abs(pf - expected).max() < 1e-9
    Z = np.atleast_3d(contact_plane_frame(T.I, P))
    M = 2 * np.einsum("nia,ij,njb->nab", Z, T.I, Z)
    assert np.abs(pf**2 - np.linalg.det(M)).max() < 1e-8


@given(directions(), seeds)
def test_nondegeneracy_over_combined_forms(e, seed):
    P = unit_rows(np.random.default_rng(seed), 20, 8)
    assert np.abs(contact_nondegeneracy(combine(T2, e), P) - 8.0).max() < 1e-9


def test_nondegeneracy_vanishes_for_degenerate_generator():
    A = T1.I.copy()
    A[2:, 2:] = 0.0
    th = np.linspace(0, 2 * np.pi, 40)
    P = np.stack([np.zeros_like(th), np.zeros_like(th), np.cos(th), np.sin(th)], axis=1)
    assert contact_nondegeneracy(A, P).min() < 1e-10


def test_nondegeneracy_rejects_zero_and_odd():
    with pytest.raises(ValueError):
        contact_nondegeneracy(np.zeros((4, 4)), np.eye(4)[0])
    A3 = np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 0]], dtype=float)
    with pytest.raises(ValueError):
        contact_nondegeneracy(A3, np.eye(3)[0])


def test_hamiltonian_field_special_cases(rng):
    P = unit_rows(rng, 10, 8)
    A = T2.K
    assert np.abs(hamiltonian_vector_field(A, 1.0, P) - reeb_field(A, P)).max() < 1e-10
    assert np.abs(hamiltonian_vector_field(A, 0.0, P)).max() < 1e-12


def test_hamiltonian_field_residuals_for_coordinate_function(rng):
    P = unit_rows(rng, 20, 4)
    H = Hamiltonian.static(lambda p: p[..., 0])
    X = hamiltonian_vector_field(T1.I, H, P)
    assert max(hamiltonian_residuals(T1.I, H, P, X).values()) < 1e-8


def test_fd_gradient_matches_analytic(rng):
    P = unit_rows(rng, 20, 4)
    f = lambda p: p[..., 0] * p[..., 1]
    g = lambda p: np.stack([p[..., 1], p[..., 0], 0 * p[..., 0], 0 * p[..., 0]], axis=-1)
    Hf, Hg = Hamiltonian.static(f), Hamiltonian.static(f, g)
    X1 = hamiltonian_vector_field(T1.I, Hf, P)
    X2 = hamiltonian_vector_field(T1.I, Hg, P)
    assert np.abs(X1 - X2).max() < 1e-9


@given(seeds, st.floats(-2, 2), st.floats(-2, 2))
def test_hamiltonian_field_is_linear(seed, a, b):
    rng = np.random.default_rng(seed)
    P = unit_rows(rng, 8, 4)
    H1 = Hamiltonian.static(lambda p: p[..., 1], lambda p: np.broadcast_to(np.eye(4)[1], p.shape))
    H2 = Hamiltonian.static(lambda p: p[..., 2] ** 2, lambda p: 2 * p[..., 2, None] * np.eye(4)[2])
    H = Hamiltonian.static(lambda p: a * H1(p) + b * H2(p),
                           lambda p: a * H1.gradient(p, 0) + b * H2.gradient(p, 0))
    lhs = hamiltonian_vector_field(T1.J, H, P)
    rhs = a * hamiltonian_vector_field(T1.J, H1, P) + b * hamiltonian_vector_field(T1.J, H2, P)
    assert np.abs(lhs - rhs).max() < 1e-9


def test_reeb_flow_is_rotation(rng):
    P = unit_rows(rng, 10, 8)
    out = hamiltonian_flow(T2.K, 1.0, P, 2.0, 1e-3)
    assert np.abs(out - P @ exp_scaled_structure(-T2.K, 2.0, 1.0).T).max() < 1e-8


def test_flow_at_time_zero_and_bad_step(rng):
    p = unit_rows(rng, 1, 4)[0]
    assert np.array_equal(hamiltonian_flow(T1.I, 1.0, p, 0.0, 0.1), p)
    with pytest.raises(ValueError):
        hamiltonian_flow(T1.I, 1.0, p, 1.0, 0.0)


def test_flow_is_fourth_order(rng):
    P = unit_rows(rng, 5, 4)
    H = Hamiltonian.static(lambda p: p[..., 0] + 0.5 * p[..., 1] * p[..., 2])
    ref = hamiltonian_flow(T1.J, H, P, 1.0, 0.025 / 4)
    e1, e2 = (np.abs(hamiltonian_flow(T1.J, H, P, 1.0, h) - ref).max() for h in (0.1, 0.05))
    assert 12 < e1 / e2 < 20


def test_flow_preserves_sphere_and_time_dependence(rng):
    P = unit_rows(rng, 5, 4)
    H = Hamiltonian(lambda p, t: np.cos(t) * p[..., 0])
    out = hamiltonian_flow(T1.I, H, P, 1.5, 1e-2, t0=0.3)
    assert np.abs(np.linalg.norm(out, axis=1) - 1).max() < 1e-12


def test_complex_tangencies_plane_is_invariant(rng):
    form = complex_tangencies(T1.I)
    assert np.array_equal(form.generator, T1.I)
    e = rng.normal(size=3)
    j = combine(T2, e / np.linalg.norm(e))
    for p in unit_rows(rng, 10, 8):
        Z = contact_plane_frame(complex_tangencies(j), p)
        assert Z.shape == (8, 6)
        assert np.abs(j @ Z - Z @ (Z.T @ j @ Z)).max() < 1e-10
