"""Almost contact structures at a point, their extension to complex structures,
and the winding degree of spheres of complex structures.

Coordinates on ``T_q S^{d-1}`` come from an orthonormal framing ``tau~``;
together with the outward normal (written ``d_t``) they identify
``T_q S^{d-1} ⊕ R`` with ``R^d`` through the orthogonal matrix
``T = [tau~^T; q^T]``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contact import contact_plane_frame, reeb_field
from .errors import ConventionError, NotCommutingError, StructureError
from .quaternionic import (
    QuaternionicTriple,
    check_complex_structure,
    det_winding,
    sphere_direction,
)

IDENTITY_TOL = 1e-12
GRAM_TOL = 1e-8


@dataclass(frozen=True)
class AlmostContactPoint:
    """A unit vector ``v`` in ``R^k`` and a complex structure ``j`` on ``v^⊥``.

    ``basis`` holds an orthonormal basis of ``v^⊥`` as columns; ``j`` is
    written in that basis.
    """

    v: np.ndarray
    basis: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        B = np.asarray(self.basis, dtype=float)
        if abs(np.linalg.norm(v) - 1.0) > 1e-10:
            raise ValueError("v must be a unit vector")
        if B.shape != (v.size, v.size - 1):
            raise ValueError(f"basis must have shape {(v.size, v.size - 1)}, got {B.shape}")
        Q = np.column_stack([B, v])
        if np.abs(Q.T @ Q - np.eye(v.size)).max() > 1e-10:
            raise ValueError("basis is not an orthonormal basis of the complement of v")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "j", check_complex_structure(self.j))


def h_extend(a: AlmostContactPoint) -> np.ndarray:
    """Complex structure on ``R^k ⊕ R``: ``j`` on ``v^⊥`` and ``v -> d_t -> -v``.

    In the ordered basis ``(v^⊥ basis, v, d_t)`` the matrix is
    ``[[j, 0, 0], [0, 0, -1], [0, 1, 0]]``; the result is returned in the
    standard coordinates of ``R^{k+1}`` (``d_t`` last).
    """
    k = a.v.size
    Q = np.zeros((k + 1, k + 1))
    Q[:k, : k - 1] = a.basis
    Q[:k, k - 1] = a.v
    Q[k, k] = 1.0
    blk = np.zeros((k + 1, k + 1))
    blk[: k - 1, : k - 1] = a.j
    blk[k - 1, k] = -1.0
    blk[k, k - 1] = 1.0
    return Q @ blk @ Q.T


def conjugation_path(T: QuaternionicTriple, theta: float, phi: float, tol: float = IDENTITY_TOL):
    """``P = cos(phi/2) I + sin(phi/2) J_theta`` with ``J_theta = cos th J + sin th K``,
    and ``I~ = P^T I P``.

    Raises :class:`ConventionError` unless ``P`` is orthogonal and
    ``I~ = cos(phi) I + sin(phi) J_theta``.
    """
    I, J, K = T.as_tuple()
    J_theta = np.cos(theta) * J + np.sin(theta) * K
    P = np.cos(phi / 2) * I + np.sin(phi / 2) * J_theta
    Itilde = P.T @ I @ P
    orth = float(np.abs(P.T @ P - np.eye(T.dim)).max())
    formula = float(np.abs(Itilde - (np.cos(phi) * I + np.sin(phi) * J_theta)).max())
    if orth > tol or formula > tol:
        raise ConventionError(
            f"conjugation identities fail (|P^T P - id| = {orth:.2e}, |I~ - formula| = {formula:.2e})"
        )
    return P, Itilde


def polar_loop(T: QuaternionicTriple, resolution: int) -> list[np.ndarray]:
    """``U(theta) = P_{theta, pi} J^{-1}`` on ``resolution`` samples of ``[0, 2pi]``."""
    J_inv = -T.J
    thetas = np.linspace(0.0, 2 * np.pi, resolution)
    loop = [conjugation_path(T, th, np.pi)[0] @ J_inv for th in thetas]
    loop[-1] = loop[0]
    return loop


def sphere_degree(T: QuaternionicTriple, resolution: int = 512, tol: float = 1e-10) -> int:
    """Winding of ``det_C U(theta)`` with respect to ``I`` for the loop of :func:`polar_loop`."""
    if resolution < 64:
        raise ValueError(f"resolution must be at least 64, got {resolution}")
    I = T.I
    eye = np.eye(T.dim)
    loop = polar_loop(T, resolution)
    for U in loop:
        comm = float(np.abs(U @ I - I @ U).max())
        if comm > tol:
            raise NotCommutingError(f"loop leaves the I-linear maps: |[U, I]| = {comm:.3e}")
        if float(np.abs(U.T @ U - eye).max()) > tol:
            raise StructureError("loop leaves the orthogonal group")
    return det_winding(loop, I)


@dataclass(frozen=True)
class Framing:
    """Point ``q`` on the unit sphere and an orthonormal basis ``tau~`` (columns) of ``T_q``."""

    q: np.ndarray
    tau_tilde: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        tt = np.asarray(self.tau_tilde, dtype=float)
        if tt.shape != (q.size, q.size - 1):
            raise ValueError(f"framing must have shape {(q.size, q.size - 1)}, got {tt.shape}")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "tau_tilde", tt)

    @property
    def coordinates(self) -> np.ndarray:
        """``T``: ambient vector ``w`` -> ``(tau~^T w, q.w)``."""
        return np.vstack([self.tau_tilde.T, self.q[None]])

    def gram_determinant(self) -> float:
        return float(np.linalg.det(self.tau_tilde.T @ self.tau_tilde))


def standard_framing(d: int) -> Framing:
    """``q = e_d`` framed by ``e_1, ..., e_{d-1}``."""
    eye = np.eye(d)
    return Framing(eye[:, -1], eye[:, :-1])


@dataclass(frozen=True)
class QuaternionicFrame:
    q: np.ndarray
    eta: np.ndarray          # quaternionic basis vectors v_k (columns), n of them
    tau: np.ndarray          # (v_1, I v_1, J v_1, K v_1, v_2, ...)
    framing: Framing         # tau extended by the Reeb fields R_I, R_J, R_K

    @property
    def tau_tilde(self) -> np.ndarray:
        return self.framing.tau_tilde


def quaternionic_frame(T: QuaternionicTriple, q, tol: float = 1e-8) -> QuaternionicFrame:
    """Greedy quaternionic framing of ``eta = ker alpha_I ∩ ker alpha_J ∩ ker alpha_K`` at ``q``.

    Standard basis vectors are projected off ``span(q, Iq, Jq, Kq)`` and the
    quaternionic span of the vectors already chosen; the first with
    non-negligible remainder becomes the next ``v_k``.
    """
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    I, J, K = T.as_tuple()
    d = T.dim
    used = [q, I @ q, J @ q, K @ q]
    vs = []
    for idx in range(d):
        if len(used) == d:
            break
        w = np.zeros(d)
        w[idx] = 1.0
        for _ in range(2):
            Q = np.column_stack(used)
            w = w - Q @ (Q.T @ w)
        nw = np.linalg.norm(w)
        if nw < tol:
            continue
        v = w / nw
        vs.append(v)
        used.extend([v, I @ v, J @ v, K @ v])
    tau = np.column_stack([x for v in vs for x in (v, I @ v, J @ v, K @ v)]) if vs else np.zeros((d, 0))
    reeb = [reeb_field(M, q) for M in (I, J, K)]
    tau_tilde = np.column_stack([tau] + [r[:, None] for r in reeb])
    framing = Framing(q, tau_tilde)
    if framing.gram_determinant() < GRAM_TOL:
        raise StructureError("extended framing is degenerate")
    eta = np.column_stack(vs) if vs else np.zeros((d, 0))
    return QuaternionicFrame(q, eta, tau, framing)


def eta_invariance_residual(T: QuaternionicTriple, frame: QuaternionicFrame) -> float:
    """How far ``I, J, K`` move the ``tau`` frame out of its own span."""
    tau = frame.tau
    if tau.shape[1] == 0:
        return 0.0
    proj = tau @ tau.T
    worst = 0.0
    for M in T.as_tuple():
        X = M @ tau
        worst = max(worst, float(np.abs(X - proj @ X).max()))
    return worst


def _framing(frame) -> Framing:
    return frame.framing if isinstance(frame, QuaternionicFrame) else frame


def evaluate_almost_contact(j, frame) -> AlmostContactPoint:
    """``(xi, j|xi)`` of the form ``p^T j dp`` at ``q``, written in ``tau~`` coordinates.

    The coorienting vector is the Reeb field ``R = -j q`` of the form.
    """
    fr = _framing(frame)
    if fr.gram_determinant() < GRAM_TOL:
        raise StructureError("framing is degenerate")
    j = check_complex_structure(j)
    R = reeb_field(j, fr.q)
    Z = contact_plane_frame(j, fr.q)
    tt = fr.tau_tilde
    v = tt.T @ R
    B = tt.T @ Z
    return AlmostContactPoint(v / np.linalg.norm(v), B, Z.T @ j @ Z)


@dataclass
class StructureSphere:
    thetas: np.ndarray
    phis: np.ndarray
    grid: np.ndarray         # (len(thetas), len(phis), d, d)

    def max_structure_defect(self) -> float:
        d = self.grid.shape[-1]
        sq = np.einsum("abij,abjk->abik", self.grid, self.grid) + np.eye(d)
        return float(np.abs(sq).max())


def evaluate_sphere_at_point(T: QuaternionicTriple, frame, thetas, phis) -> StructureSphere:
    """``h`` of the evaluated almost contact structures ``(xi_e, j_e)`` over a ``(theta, phi)`` grid."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    E = sphere_direction(thetas[:, None], phis[None, :])
    I, J, K = T.as_tuple()
    grid = np.empty((len(thetas), len(phis), T.dim, T.dim))
    for a in range(len(thetas)):
        for b in range(len(phis)):
            e = E[a, b]
            je = e[0] * I + e[1] * J + e[2] * K
            grid[a, b] = h_extend(evaluate_almost_contact(je, frame))
    return StructureSphere(thetas, phis, grid)


def fit_triple(sphere: StructureSphere) -> tuple[np.ndarray, float]:
    """Least-squares ``(I', J', K')`` with ``grid(theta, phi) ≈ e0 I' + e1 J' + e2 K'``.

    Returns the stacked matrices ``(3, d, d)`` and the max fit residual.
    """
    E = sphere_direction(sphere.thetas[:, None], sphere.phis[None, :]).reshape(-1, 3)
    d = sphere.grid.shape[-1]
    Y = sphere.grid.reshape(-1, d * d)
    coef, *_ = np.linalg.lstsq(E, Y, rcond=None)
    resid = float(np.abs(E @ coef - Y).max())
    return coef.reshape(3, d, d), resid


def structure_sphere_degree(sphere: StructureSphere, resolution: int = 512, tol: float = 1e-9) -> int:
    """Degree of a sampled sphere of complex structures.

    A constant sphere has degree 0.  Otherwise the sphere must be the linear
    sphere of a quaternionic triple (checked by a least-squares fit); its
    degree is :func:`sphere_degree` of that triple.
    """
    g = sphere.grid
    if float(np.abs(g - g[0, 0]).max()) < tol:
        return 0
    mats, resid = fit_triple(sphere)
    if resid > tol:
        raise StructureError(f"sphere is not linear in e (fit residual {resid:.3e})")
    d = g.shape[-1]
    if d % 4:
        raise StructureError("a quaternionic sphere needs dimension divisible by 4")
    triple = QuaternionicTriple(d // 4, *mats)
    bad = {k: v for k, v in triple.relation_residuals().items() if v > tol}
    if bad:
        raise StructureError(f"fitted triple violates the quaternion relations: {bad}")
    return sphere_degree(triple, resolution)


def roundtrip_identity(j, frame=None) -> tuple[np.ndarray, float]:
    """``c(j)``: complex tangencies of ``j``, evaluated at the framed point, then ``h``.

    Returns ``(c(j), max |c(j) - j|)``.  ``frame`` defaults to the standard
    framing of ``R^d``.
    """
    j = check_complex_structure(j)
    frame = standard_framing(j.shape[0]) if frame is None else frame
    c = h_extend(evaluate_almost_contact(j, frame))
    return c, float(np.abs(c - j).max())
