"""Compiled kernels against the numpy fallback and against oracles."""
import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reebverify import kernels, oracles
from reebverify.kernels import _pykernels
from reebverify.quaternionic import build_quaternionic_triple, combine

from .helpers import unit_rows

try:
    from reebverify.kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])
needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
def test_householder_complement_is_orthonormal_complement(impl, rng):
    X = unit_rows(rng, 50, 8)
    F = impl.householder_complement(X)
    assert F.shape == (50, 8, 7)
    gram = np.einsum("nik,nil->nkl", F, F)
    assert np.abs(gram - np.eye(7)).max() < 1e-13
    assert np.abs(np.einsum("ni,nik->nk", X, F)).max() < 1e-13


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
def test_householder_complement_at_basis_vector(impl):
    e1 = np.eye(5)[:1]
    F = impl.householder_complement(e1)[0]
    assert np.abs(np.abs(F) - np.eye(5)[:, 1:]).max() < 1e-15


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
def test_pfaffian_matches_matching_expansion(impl, rng):
    for n in (2, 4, 6, 8):
        X = rng.normal(size=(10, n, n))
        M = X - np.swapaxes(X, 1, 2)
        got = impl.pfaffian(M)
        ref = np.array([oracles.pfaffian_by_matchings(m) for m in M])
        assert np.abs(got - ref).max() < 1e-10 * max(1.0, np.abs(ref).max())


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
def test_pfaffian_of_singular_and_odd(impl):
    assert impl.pfaffian(np.zeros((1, 4, 4)))[0] == 0.0
    assert impl.pfaffian(np.zeros((1, 3, 3)))[0] == 0.0


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.BACKEND)
def test_solve_contact_reeb_of_complex_structure(impl, rng):
    T = build_quaternionic_triple(2)
    P = unit_rows(rng, 30, 8)
    R, det = impl.solve_contact(T.J, P, 1.0, np.zeros_like(P))
    assert np.abs(R + P @ T.J.T).max() < 1e-12
    assert np.all(np.abs(det) > 1e-6)


@needs_c
@given(st.integers(0, 2**31 - 1), st.sampled_from([4, 8, 12]))
def test_backends_agree(seed, d):
    rng = np.random.default_rng(seed)
    T = build_quaternionic_triple(d // 4)
    e = rng.normal(size=3)
    A = combine(T, e / np.linalg.norm(e))
    P = unit_rows(rng, 20, d)
    a = rng.normal(size=20)
    B = rng.normal(size=(20, d))
    Vp, Dp = _pykernels.solve_contact(A, P, a, B)
    Vc, Dc = _ckernels.solve_contact(A, P, a, B)
    assert np.abs(Vp - Vc).max() < 1e-11
    assert np.abs(np.abs(Dp) - np.abs(Dc)).max() < 1e-9 * np.abs(Dp).max()
    Zp, wp = _pykernels.contact_frames(A, P)
    Zc, wc = _ckernels.contact_frames(A, P)
    assert np.abs(Zp - Zc).max() < 1e-12
    assert np.abs(wp - wc).max() < 1e-12
    X = rng.normal(size=(5, d, d))
    M = X - np.swapaxes(X, 1, 2)
    assert np.allclose(_pykernels.pfaffian(M), _ckernels.pfaffian(M), rtol=1e-10)


@needs_c
def test_compiled_kernels_accept_read_only_inputs(rng):
    A = np.broadcast_to(build_quaternionic_triple(1).I, (6, 4, 4))
    P = unit_rows(rng, 6, 4)
    P.setflags(write=False)
    V, _ = _ckernels.solve_contact(A, P, 1.0, np.zeros((6, 4)))
    assert V.shape == (6, 4)


def test_env_variable_forces_fallback():
    code = "from reebverify import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, REEBVERIFY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_selected_backend_is_reported():
    assert kernels.BACKEND in ("python", "cython")
    if _ckernels is not None and os.environ.get("REEBVERIFY_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == _ckernels.BACKEND
