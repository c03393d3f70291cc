"""The linear contact sphere ``e -> ker(e0 alpha_I + e1 alpha_J + e2 alpha_K)`` on S^{4n+3}.

Viewed as a fibration over the 2-sphere of coefficients, in spherical
coordinates ``e = (cos th sin ph, sin th sin ph, cos ph)`` with the polar
angle ``ph`` playing the radial role.  The central fiber ``ph = 0`` carries
``alpha_K``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contact import ContactForm, Hamiltonian, hamiltonian_flow
from .fibration import FibrationForm, _seeded_points
from .integrate import normalize, rk4_sphere
from .quaternionic import (
    QuaternionicTriple,
    build_quaternionic_triple,
    combine,
    exp_scaled_structure,
    sphere_direction,
)


@dataclass(frozen=True)
class LinearContactSphere:
    triple: QuaternionicTriple

    @classmethod
    def on_sphere(cls, n: int) -> "LinearContactSphere":
        """The family on ``S^{4n+3}``."""
        if int(n) != n or n < 0:
            raise ValueError(f"n must be a non-negative integer, got {n!r}")
        return cls(build_quaternionic_triple(int(n) + 1))

    @property
    def dim(self) -> int:
        return self.triple.dim

    @property
    def forms(self) -> tuple[ContactForm, ContactForm, ContactForm]:
        return tuple(ContactForm(M) for M in self.triple.as_tuple())

    def structure_at(self, theta, phi) -> np.ndarray:
        """``e0 I + e1 J + e2 K`` at ``e(theta, phi)``; broadcasts over the angles."""
        return combine(self.triple, sphere_direction(theta, phi))

    def form_at(self, theta: float, phi: float) -> ContactForm:
        return ContactForm(self.structure_at(theta, phi))


@dataclass(frozen=True)
class PolarLift:
    """``F_theta = (-sin th I + cos th J) / 2``; ``F^2 = -id/4``."""

    theta: float
    F: np.ndarray


def polar_lift_matrix(S: LinearContactSphere, theta: float) -> PolarLift:
    I, J, _ = S.triple.as_tuple()
    return PolarLift(float(theta), 0.5 * (-np.sin(theta) * I + np.cos(theta) * J))


def _dtheta_polar_matrix(S: LinearContactSphere, theta: float) -> np.ndarray:
    I, J, _ = S.triple.as_tuple()
    return 0.5 * (-np.cos(theta) * I - np.sin(theta) * J)


def lifted_polar_field(S: LinearContactSphere, theta: float, phi: float, p):
    """Horizontal lift of ``d/dphi`` at ``p``: returns ``(F_theta p, (1, 0))``.

    In Reeb-field terms this is ``d_phi + (-sin th R_I + cos th R_J) / 2``
    with ``R = j p``, i.e. the Reeb fields of ``-p^T j dp``.  For the forms
    ``p^T j dp`` used here (Reeb field ``-j p``) the sign of the Reeb term
    flips; see :func:`reeb_term_polar_field`.
    """
    p = np.asarray(p, dtype=float)
    F = polar_lift_matrix(S, theta).F
    return p @ F.T, np.array([1.0, 0.0])


def reeb_term_polar_field(S: LinearContactSphere, theta: float, phi: float, p):
    """``d_phi + (-sin th R_I(p) + cos th R_J(p)) / 2`` with the Reeb fields ``R = -j p``
    of the forms ``p^T j dp``.  Not horizontal; kept to document the sign."""
    p = np.asarray(p, dtype=float)
    I, J, _ = S.triple.as_tuple()
    RI, RJ = -(p @ I.T), -(p @ J.T)
    return 0.5 * (-np.sin(theta) * RI + np.cos(theta) * RJ), np.array([1.0, 0.0])


def transport_flow(S: LinearContactSphere, theta: float, phi: float, p):
    """``exp(phi F_theta) p``: transport from the central fiber to ``e(theta, phi)``."""
    p = np.asarray(p, dtype=float)
    E = exp_scaled_structure(polar_lift_matrix(S, theta).F, phi, c=0.5)
    return normalize(p @ E.T)


def transport_flow_ode(S: LinearContactSphere, theta: float, phi: float, p, step: float):
    """RK4 integration of :func:`lifted_polar_field` from ``0`` to ``phi``."""
    F = polar_lift_matrix(S, theta).F
    if phi == 0:
        return normalize(p)
    out, _ = rk4_sphere(lambda Q, t: Q @ F.T, np.asarray(p, dtype=float), 0.0, phi, step)
    return out


def pullback_hamiltonian(S: LinearContactSphere, theta: float, phi: float, p):
    """``dtheta`` coefficient of the pulled-back form, from the analytic ``d_theta Phi``.

    ``Phi = cos(ph/2) p + 2 sin(ph/2) F_theta p`` and
    ``d_theta Phi = 2 sin(ph/2) (d_theta F_theta) p``; the value is
    ``Phi^T j_e d_theta Phi`` with ``j_e`` the structure at ``e(theta, phi)``.
    Expected: ``sin^2(phi/2)`` for every ``p`` and ``theta``.
    """
    p = np.asarray(p, dtype=float)
    Phi = transport_flow(S, theta, phi, p)
    dPhi = 2.0 * np.sin(phi / 2.0) * (p @ _dtheta_polar_matrix(S, theta).T)
    j = S.structure_at(theta, phi)
    return np.einsum("...i,ij,...j->...", Phi, j, dPhi)


def conformal_factor(S: LinearContactSphere, theta: float, phi: float, p):
    """``log alpha_e(dPhi R_K)`` with ``R_K = -K p``; zero when ``Phi`` is a strict contactomorphism."""
    p = np.asarray(p, dtype=float)
    E = exp_scaled_structure(polar_lift_matrix(S, theta).F, phi, c=0.5)
    Phi = p @ E.T
    push = -(p @ S.triple.K.T) @ E.T
    j = S.structure_at(theta, phi)
    return np.log(np.einsum("...i,ij,...j->...", Phi, j, push))


class SphereFamilyFibration(FibrationForm):
    """The family as a fibration form over the ``(phi, theta)`` disk (``r = phi``)."""

    def __init__(self, S: LinearContactSphere):
        self.sphere = S
        self.dim = S.dim
        self._basis = np.stack(S.triple.as_tuple()).reshape(3, -1)

    def _stack(self, coeff):
        return (coeff @ self._basis).reshape(-1, self.dim, self.dim)

    def fiber_matrix(self, r, theta):
        r, theta = np.broadcast_arrays(np.atleast_1d(np.asarray(r, float)),
                                       np.atleast_1d(np.asarray(theta, float)))
        return self._stack(sphere_direction(theta, r))

    def fiber_matrix_derivatives(self, r, theta):
        phi, th = np.broadcast_arrays(np.atleast_1d(np.asarray(r, float)),
                                      np.atleast_1d(np.asarray(theta, float)))
        d_phi = np.stack([np.cos(th) * np.cos(phi), np.sin(th) * np.cos(phi), -np.sin(phi)], axis=-1)
        d_th = np.stack([-np.sin(th) * np.sin(phi), np.cos(th) * np.sin(phi), np.zeros_like(phi)], axis=-1)
        return self._stack(d_phi), self._stack(d_th)


@dataclass
class ReebIdentification:
    sign: int | None
    endpoint_distance: dict[int, float]     # sign -> max distance at theta = 2 pi
    checkpoint_distance: dict[int, float]   # sign -> max distance over all checkpoints
    checkpoints: tuple[float, ...]
    tolerance: float

    @property
    def endpoint_matches(self) -> list[int]:
        return [s for s, d in self.endpoint_distance.items() if d < self.tolerance]

    @property
    def matches(self) -> list[int]:
        return [s for s, d in self.checkpoint_distance.items() if d < self.tolerance]


def reeb_identification(S: LinearContactSphere, samples: int, seed: int, step: float = 1e-2,
                        tol: float = 1e-7, points=None) -> ReebIdentification:
    """Compare the flow of ``G = -1`` for ``alpha_K`` with ``exp(sigma t K)``, ``sigma = +-1``.

    At ``t = 2 pi`` both rotations are the identity, so the endpoint alone
    cannot separate the signs.  The flow is therefore also compared at
    ``t = pi/2, pi, 3 pi/2``; ``sign`` is the unique ``sigma`` matching at
    every checkpoint, or ``None``.
    """
    K = S.triple.K
    P = _seeded_points(S.dim, samples, seed) if points is None else np.atleast_2d(points)
    G = Hamiltonian.constant(-1.0)
    checkpoints = (0.5 * np.pi, np.pi, 1.5 * np.pi, 2.0 * np.pi)
    worst = {1: 0.0, -1: 0.0}
    end = {}
    Q, t_prev = P, 0.0
    for t in checkpoints:
        Q = hamiltonian_flow(K, G, Q, t - t_prev, step, t0=t_prev)
        t_prev = t
        for sigma in (1, -1):
            ref = P @ exp_scaled_structure(sigma * K, t, c=1.0).T
            dist = float(np.linalg.norm(Q - ref, axis=1).max())
            worst[sigma] = max(worst[sigma], dist)
            if t == checkpoints[-1]:
                end[sigma] = dist
    matches = [s for s, d in worst.items() if d < tol]
    sign = matches[0] if len(matches) == 1 else None
    return ReebIdentification(sign, end, worst, checkpoints, tol)
