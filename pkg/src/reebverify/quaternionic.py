"""Quaternionic linear algebra on R^{4m}.

Complex structures are plain ``(n, n)`` float arrays; the helpers here
validate them, build the standard quaternionic triple, combine it along
directions of the unit 2-sphere, exponentiate scaled structures in closed
form, and measure the winding of complex determinants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AliasingError, NotCommutingError, StructureError

STRUCTURE_TOL = 1e-10

# 4x4 convention: i rotates (x1,x2) and (x3,x4), j pairs them crosswise, k = ij.
_I4 = np.array(
    [[0.0, -1.0, 0.0, 0.0],
     [1.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, -1.0],
     [0.0, 0.0, 1.0, 0.0]]
)
_J4 = np.array(
    [[0.0, 0.0, -1.0, 0.0],
     [0.0, 0.0, 0.0, 1.0],
     [1.0, 0.0, 0.0, 0.0],
     [0.0, -1.0, 0.0, 0.0]]
)
_K4 = _I4 @ _J4


def as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise StructureError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise StructureError("matrix has non-finite entries")
    return M


def structure_defects(M) -> dict[str, float]:
    """Max-abs residuals of ``M^2 + 1``, ``M^T M - 1`` and ``M^T + M``."""
    M = as_square(M)
    eye = np.eye(M.shape[0])
    return {
        "square": float(np.abs(M @ M + eye).max()),
        "orthogonal": float(np.abs(M.T @ M - eye).max()),
        "antisymmetric": float(np.abs(M.T + M).max()),
    }


def check_complex_structure(M, tol: float = STRUCTURE_TOL) -> np.ndarray:
    """Return ``M`` as an array after checking it is an orthogonal complex structure."""
    M = as_square(M)
    if M.shape[0] % 2:
        raise StructureError(f"complex structure needs even dimension, got {M.shape[0]}")
    bad = {k: v for k, v in structure_defects(M).items() if v > tol}
    if bad:
        raise StructureError(f"not an orthogonal complex structure: {bad}")
    return M


@dataclass(frozen=True)
class QuaternionicTriple:
    """Complex structures ``I, J, K`` on R^{4m} with ``IJ = K``."""

    m: int
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray

    @property
    def dim(self) -> int:
        return 4 * self.m

    def as_tuple(self):
        return self.I, self.J, self.K

    def relation_residuals(self) -> dict[str, float]:
        I, J, K = self.I, self.J, self.K
        eye = np.eye(self.dim)
        res = {
            "I2": I @ I + eye,
            "J2": J @ J + eye,
            "K2": K @ K + eye,
            "IJ-K": I @ J - K,
            "IJ+JI": I @ J + J @ I,
            "JK+KJ": J @ K + K @ J,
            "KI+IK": K @ I + I @ K,
            "IJK": I @ J @ K + eye,
        }
        return {k: float(np.abs(v).max()) for k, v in res.items()}


def build_quaternionic_triple(m: int) -> QuaternionicTriple:
    """Block-diagonal direct sum of ``m`` copies of the 4x4 ``i, j, k``."""
    if int(m) != m or m < 1:
        raise ValueError(f"quaternionic dimension must be a positive integer, got {m!r}")
    m = int(m)
    eye = np.eye(m)
    return QuaternionicTriple(m, np.kron(eye, _I4), np.kron(eye, _J4), np.kron(eye, _K4))


@dataclass(frozen=True)
class SphereDirection:
    """Unit vector ``(e0, e1, e2)``; ``from_angles`` uses azimuth ``theta``, polar ``phi``."""

    e0: float
    e1: float
    e2: float

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SphereDirection":
        return cls(np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.e0, self.e1, self.e2], dtype=float)


def sphere_direction(theta, phi) -> np.ndarray:
    """Coefficient vectors ``e(theta, phi)``; broadcasts, last axis has length 3."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return np.stack(
        [np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=-1
    )


def combine(T: QuaternionicTriple, e, tol: float = 1e-12) -> np.ndarray:
    """``e0 I + e1 J + e2 K`` for a unit vector ``e``.

    ``e`` may be a :class:`SphereDirection` or an array whose last axis has
    length 3; a stack of directions yields a stack of matrices.
    """
    if isinstance(e, SphereDirection):
        e = e.vector
    e = np.asarray(e, dtype=float)
    if e.shape[-1] != 3:
        raise ValueError(f"direction must have 3 components, got shape {e.shape}")
    norm_err = np.abs(np.einsum("...i,...i->...", e, e) - 1.0)
    if np.any(norm_err > tol):
        raise ValueError(f"direction is not unit (|e|^2 - 1 = {float(np.max(norm_err)):.3e})")
    return (
        e[..., 0, None, None] * T.I
        + e[..., 1, None, None] * T.J
        + e[..., 2, None, None] * T.K
    )


def exp_scaled_structure(F, t: float, c: float | None = None, tol: float = 1e-10) -> np.ndarray:
    """``exp(tF)`` for ``F`` with ``F^2 = -c^2 id``: ``cos(ct) id + sin(ct)/c F``.

    ``c`` defaults to ``sqrt(-tr(F^2)/n)``.  Raises :class:`StructureError`
    when ``F^2`` is not a negative multiple of the identity.
    """
    F = as_square(F)
    n = F.shape[0]
    F2 = F @ F
    if c is None:
        c2 = -np.trace(F2) / n
        if c2 <= 0:
            raise StructureError("F^2 is not a negative multiple of the identity")
        c = float(np.sqrt(c2))
    if c <= 0:
        raise ValueError("scale c must be positive")
    err = float(np.abs(F2 + c * c * np.eye(n)).max())
    if err > tol * max(1.0, c * c):
        raise StructureError(f"F^2 + c^2 id has max-abs entry {err:.3e}")
    return np.cos(c * t) * np.eye(n) + (np.sin(c * t) / c) * F


def complex_basis(I, tol: float = 1e-10) -> np.ndarray:
    """Real orthonormal basis ``[b1, I b1, b2, I b2, ...]`` adapted to ``I``.

    Each ``b_k`` is the first standard basis vector not already in the span
    of the chosen pairs, orthonormalized against it.
    """
    I = check_complex_structure(I)
    n = I.shape[0]
    cols = []
    for idx in range(n):
        if len(cols) == n:
            break
        b = np.zeros(n)
        b[idx] = 1.0
        if cols:
            Q = np.column_stack(cols)
            b = b - Q @ (Q.T @ b)
            b = b - Q @ (Q.T @ b)
        nb = np.linalg.norm(b)
        if nb < tol:
            continue
        b /= nb
        cols.extend([b, I @ b])
    return np.column_stack(cols)


def complexify(A, I, tol: float = 1e-9) -> np.ndarray:
    """Matrix of an ``I``-linear map ``A`` in the complex basis of :func:`complex_basis`."""
    A = as_square(A)
    I = check_complex_structure(I)
    comm = float(np.linalg.norm(A @ I - I @ A))
    if comm > tol * max(1.0, float(np.linalg.norm(A))):
        raise NotCommutingError(f"matrix does not commute with I: |[A, I]| = {comm:.3e}")
    E = complex_basis(I)
    R = E.T @ A @ E
    return R[0::2, 0::2] + 1j * R[1::2, 0::2]


def realify(Z, I) -> np.ndarray:
    """Inverse of :func:`complexify` for the same ``I``."""
    Z = np.asarray(Z, dtype=complex)
    E = complex_basis(I)
    h = Z.shape[0]
    R = np.empty((2 * h, 2 * h))
    R[0::2, 0::2] = Z.real
    R[1::2, 0::2] = Z.imag
    R[0::2, 1::2] = -Z.imag
    R[1::2, 1::2] = Z.real
    return E @ R @ E.T


def complex_determinant(A, I) -> complex:
    return complex(np.linalg.det(complexify(A, I)))


def det_winding(
    loop: Sequence[np.ndarray],
    I,
    max_step: float = np.pi / 2,
    close_tol: float = 1e-9,
) -> int:
    """Winding number of ``theta -> det_C(loop(theta))`` about the origin.

    ``loop`` samples a closed curve including both endpoints.  Consecutive
    argument increments are wrapped into ``(-pi, pi]``; an increment larger
    than ``max_step`` raises :class:`AliasingError`.
    """
    mats = [as_square(M) for M in loop]
    if len(mats) < 3:
        raise ValueError("loop needs at least three samples")
    gap = float(np.abs(mats[0] - mats[-1]).max())
    if gap > close_tol:
        raise ValueError(f"loop does not close: first and last samples differ by {gap:.3e}")
    dets = np.array([complex_determinant(M, I) for M in mats])
    if np.any(np.abs(dets) < 1e-300):
        raise ValueError("loop passes through a singular matrix")
    steps = np.angle(dets[1:] / dets[:-1])
    worst = float(np.abs(steps).max())
    if worst > max_step:
        raise AliasingError(
            f"argument jump {worst:.3f} exceeds {max_step:.3f}; sample the loop more finely"
        )
    total = steps.sum() / (2 * np.pi)
    w = int(np.rint(total))
    if abs(total - w) > 1e-6:
        raise AliasingError(f"accumulated argument {total:.6f} turns is not near an integer")
    return w


def unitary_loop(I, samples: int = 512) -> list[np.ndarray]:
    """Samples of ``theta -> cos(theta) id + sin(theta) I`` on ``[0, 2pi]``."""
    I = check_complex_structure(I)
    eye = np.eye(I.shape[0])
    thetas = np.linspace(0.0, 2 * np.pi, samples)
    loop = [np.cos(t) * eye + np.sin(t) * I for t in thetas]
    loop[-1] = loop[0]
    return loop
