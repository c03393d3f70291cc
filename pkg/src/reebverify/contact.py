"""Contact forms ``alpha(v)|_p = p^T A v`` on unit spheres ``S^{d-1} ⊂ R^d``.

Points and vectors may be single ``(d,)`` arrays or batches ``(N, d)``;
results follow the same leading shape.  The exterior derivative is used in
the closed form ``d alpha(u, v) = 2 u^T A v`` (``A`` antisymmetric), the
convention confirmed by :func:`reebverify.oracles.exterior_derivative_fd`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .errors import NotContactError, StructureError
from .integrate import normalize, rk4_sphere
from .quaternionic import as_square, check_complex_structure

SPHERE_TOL = 1e-9
TANGENT_TOL = 1e-9
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ContactForm:
    """The 1-form ``p^T A dp`` generated by an antisymmetric matrix ``A``."""

    generator: np.ndarray

    def __post_init__(self):
        A = as_square(self.generator)
        asym = float(np.abs(A + A.T).max())
        if asym > 1e-10:
            raise StructureError(f"generator is not antisymmetric (|A + A^T| = {asym:.3e})")
        object.__setattr__(self, "generator", A)

    @property
    def dim(self) -> int:
        return self.generator.shape[0]


def as_form(form) -> ContactForm:
    return form if isinstance(form, ContactForm) else ContactForm(np.asarray(form, dtype=float))


def _points(p, d: int):
    P = np.asarray(p, dtype=float)
    single = P.ndim == 1
    P = np.atleast_2d(P)
    if P.shape[-1] != d:
        raise ValueError(f"point dimension {P.shape[-1]} does not match form dimension {d}")
    err = np.abs(np.linalg.norm(P, axis=1) - 1.0)
    if np.any(err > SPHERE_TOL):
        raise ValueError(f"point is not on the unit sphere (||p| - 1| = {float(err.max()):.3e})")
    return P, single


def _unbatch(x, single):
    return x[0] if single else x


def evaluate_form(form, p, v):
    """``p^T A v``."""
    A = as_form(form).generator
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    if p.shape[-1] != A.shape[0] or v.shape[-1] != A.shape[0]:
        raise ValueError("dimension mismatch between form, point and vector")
    return np.einsum("...i,ij,...j->...", p, A, v)


def two_form(form, p, u, v, tol: float = TANGENT_TOL):
    """``d alpha(u, v) = 2 u^T A v`` for tangent ``u, v`` at ``p``."""
    A = as_form(form).generator
    p, u, v = (np.asarray(x, dtype=float) for x in (p, u, v))
    off = max(float(np.abs(np.einsum("...i,...i->...", p, u)).max()),
              float(np.abs(np.einsum("...i,...i->...", p, v)).max()))
    if off > tol:
        raise ValueError(f"vectors are not tangent at p (|p.u|, |p.v| up to {off:.3e})")
    return 2.0 * np.einsum("...i,ij,...j->...", u, A, v)


@dataclass(frozen=True)
class TangentFrame:
    point: np.ndarray
    basis: np.ndarray  # (d, d-1), orthonormal columns spanning p^⊥

    @property
    def vectors(self) -> np.ndarray:
        return self.basis.T


def build_tangent_frame(p) -> TangentFrame:
    """Householder frame of ``T_p S``: columns ``2..d`` of the reflector fixing ``p``."""
    P, single = _points(p, np.asarray(p).shape[-1])
    F = kernels.householder_complement(P)
    return TangentFrame(_unbatch(P, single), _unbatch(F, single))


def contact_plane_frame(form, p):
    """Orthonormal frame ``(d, d-2)`` of ``ξ_p = ker alpha_p ∩ T_p S``."""
    A = as_form(form).generator
    P, single = _points(p, A.shape[0])
    Z, wnorm = kernels.contact_frames(A, P)
    if np.any(wnorm < SINGULAR_TOL):
        raise NotContactError("alpha vanishes on the tangent space at a sample point")
    return _unbatch(Z, single)


def reeb_field(form, p):
    """Reeb vector: tangent ``R`` with ``alpha(R) = 1`` and ``d alpha(R, ξ) = 0``."""
    A = as_form(form).generator
    P, single = _points(p, A.shape[0])
    R, det = kernels.solve_contact(A, P, 1.0, np.zeros_like(P))
    if np.any(np.abs(det) < SINGULAR_TOL):
        raise NotContactError("singular Reeb system: form is not contact at a sample point")
    return _unbatch(R, single)


def reeb_residuals(form, p, R) -> dict[str, float]:
    """Max residuals of the Reeb equations, tested on a contact-plane frame."""
    A = as_form(form).generator
    P, _ = _points(p, A.shape[0])
    R = np.atleast_2d(np.asarray(R, dtype=float))
    Z = np.atleast_3d(contact_plane_frame(A, P))
    return {
        "alpha": float(np.abs(np.einsum("ni,ij,nj->n", P, A, R) - 1.0).max()),
        "dalpha": float(np.abs(2.0 * np.einsum("ni,ij,njk->nk", R, A, Z)).max()),
        "tangent": float(np.abs(np.einsum("ni,ni->n", P, R)).max()),
    }


def contact_nondegeneracy(form, p):
    """``|Pf(M)|`` with ``M_ab = d alpha(z_a, z_b)`` on an orthonormal ξ_p frame.

    Positive exactly where the form is contact; zero where ``alpha`` vanishes
    on ``T_p S``.
    """
    A = as_form(form).generator
    d = A.shape[0]
    if d % 2:
        raise ValueError(f"ambient dimension must be even, got {d}")
    if not np.any(A):
        raise ValueError("zero form has no contact planes")
    P, single = _points(p, d)
    Z, wnorm = kernels.contact_frames(A, P)
    M = 2.0 * np.einsum("nia,ij,njb->nab", Z, A, Z)
    pf = np.abs(kernels.pfaffian(np.ascontiguousarray(M)))
    pf[wnorm < SINGULAR_TOL] = 0.0
    return _unbatch(pf, single)


@dataclass(frozen=True)
class Hamiltonian:
    """Time-dependent function ``H(p, t)`` on the sphere.

    ``value`` and the optional ambient ``gradient`` must broadcast over
    leading axes of ``p`` (``p[..., i]`` style).  Without a gradient,
    tangential derivatives use central differences along great circles.
    """

    value: Callable
    gradient: Callable | None = None
    fd_step: float = 1e-5

    @classmethod
    def constant(cls, c: float) -> "Hamiltonian":
        return cls(lambda p, t: np.full(np.shape(p)[:-1], float(c)),
                   lambda p, t: np.zeros(np.shape(p)))

    @classmethod
    def static(cls, f, grad=None, fd_step: float = 1e-5) -> "Hamiltonian":
        g = None if grad is None else (lambda p, t: grad(p))
        return cls(lambda p, t: f(p), g, fd_step)

    def __call__(self, p, t: float = 0.0):
        return np.broadcast_to(np.asarray(self.value(p, t), dtype=float), np.shape(p)[:-1])

    def tangent_gradient(self, P, t: float = 0.0):
        """Ambient vectors representing ``dH`` on ``T_p S`` for a batch ``(N, d)``."""
        if self.gradient is not None:
            return np.broadcast_to(np.asarray(self.gradient(P, t), dtype=float), P.shape)
        F = kernels.householder_complement(P)
        h = self.fd_step
        offs = h * np.swapaxes(F, 1, 2)
        plus = self(normalize(P[:, None, :] + offs), t)
        minus = self(normalize(P[:, None, :] - offs), t)
        D = (plus - minus) / (2.0 * h)
        return np.einsum("nij,nj->ni", F, D)


def as_hamiltonian(H) -> Hamiltonian:
    if isinstance(H, Hamiltonian):
        return H
    if callable(H):
        return Hamiltonian.static(H)
    return Hamiltonian.constant(float(H))


def _field(A, P, values, grads):
    X, det = kernels.solve_contact(A, P, values, -grads)
    if np.any(np.abs(det) < SINGULAR_TOL):
        raise NotContactError("singular contact system at a sample point")
    return X


def hamiltonian_vector_field(form, H, p, t: float = 0.0):
    """Contact vector field ``X`` with ``i_X alpha = H`` and ``i_X d alpha = -dH + (i_R dH) alpha``."""
    A = as_form(form).generator
    H = as_hamiltonian(H)
    P, single = _points(p, A.shape[0])
    X = _field(A, P, H(P, t), H.tangent_gradient(P, t))
    return _unbatch(X, single)


def hamiltonian_residuals(form, H, p, X, t: float = 0.0) -> dict[str, float]:
    """Residuals of both defining equations on a full tangent frame."""
    A = as_form(form).generator
    H = as_hamiltonian(H)
    P, _ = _points(p, A.shape[0])
    X = np.atleast_2d(np.asarray(X, dtype=float))
    F = kernels.householder_complement(P)
    g = H.tangent_gradient(P, t)
    R = np.atleast_2d(reeb_field(A, P))
    dH_R = np.einsum("ni,ni->n", g, R)
    lhs = 2.0 * np.einsum("ni,ij,njk->nk", X, A, F)
    dH_F = np.einsum("ni,nik->nk", g, F)
    alpha_F = np.einsum("ni,ij,njk->nk", P, A, F)
    rhs = -dH_F + dH_R[:, None] * alpha_F
    return {
        "alpha": float(np.abs(np.einsum("ni,ij,nj->n", P, A, X) - H(P, t)).max()),
        "dalpha": float(np.abs(lhs - rhs).max()),
    }


def hamiltonian_flow(form, H, p0, t: float, step: float, t0: float = 0.0):
    """Endpoint of the flow of the contact field of ``H_s`` for ``s`` in ``[t0, t0 + t]``.

    RK4 with renormalization onto the sphere after each step.
    """
    A = as_form(form).generator
    H = as_hamiltonian(H)
    P, single = _points(p0, A.shape[0])
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    if t == 0:
        return _unbatch(P.copy(), single)

    def vf(Q, s):
        return _field(A, Q, H(Q, s), H.tangent_gradient(Q, s))

    out, _ = rk4_sphere(vf, P, t0, t0 + t, step)
    return _unbatch(out, single)


def complex_tangencies(j) -> ContactForm:
    """Contact form whose kernel is the field of ``j``-complex tangencies ``TS ∩ jTS``."""
    return ContactForm(check_complex_structure(j))
