"""Contact fibrations over the disk, their canonical connection and holonomy.

The total space is ``S^{d-1} x D^2`` with polar base coordinates
``(r, theta)``.  A total-space tangent vector is a pair ``(v, u)`` of a
fiber vector ``v`` and base components ``u = (u_r, u_theta)``.  Fibration
forms are written

    alpha = p^T A(r, theta) dp + a_r dr + a_theta dtheta,

which covers both ``alpha_0 + H dtheta`` and the sphere family
``alpha_{e(theta, phi)}``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .contact import ContactForm, Hamiltonian, as_form, hamiltonian_flow
from .errors import ConvergenceError, NotContactError
from .integrate import normalize, rk4_sphere

SINGULAR_TOL = 1e-12


def _batch(P, r, theta):
    P = np.atleast_2d(np.asarray(P, dtype=float))
    N = P.shape[0]
    r = np.broadcast_to(np.asarray(r, dtype=float), (N,))
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (N,))
    return P, r, theta


class FibrationForm:
    """Base class; subclasses supply the pieces of ``alpha`` as batched arrays."""

    dim: int

    def fiber_matrix(self, r, theta):
        raise NotImplementedError

    def fiber_matrix_derivatives(self, r, theta):
        raise NotImplementedError

    def base_coefficients(self, P, r, theta):
        N = np.shape(P)[0]
        return np.zeros(N), np.zeros(N)

    def base_derivatives(self, P, r, theta):
        """``(grad_p a_r, grad_p a_theta, d_r a_theta - d_theta a_r)``."""
        P = np.asarray(P)
        return np.zeros_like(P), np.zeros_like(P), np.zeros(P.shape[0])

    def alpha(self, P, r, theta, V, U):
        P, r, theta = _batch(P, r, theta)
        V = np.broadcast_to(V, P.shape)
        U = np.broadcast_to(U, (P.shape[0], 2))
        A = self.fiber_matrix(r, theta)
        ar, at = self.base_coefficients(P, r, theta)
        return np.einsum("ni,nij,nj->n", P, A, V) + ar * U[:, 0] + at * U[:, 1]

    def dalpha(self, P, r, theta, V1, U1, V2, U2):
        """``d alpha((V1, U1), (V2, U2))`` from the closed form of each term."""
        P, r, theta = _batch(P, r, theta)
        N = P.shape[0]
        V1, V2 = np.broadcast_to(V1, P.shape), np.broadcast_to(V2, P.shape)
        U1, U2 = np.broadcast_to(U1, (N, 2)), np.broadcast_to(U2, (N, 2))
        A = self.fiber_matrix(r, theta)
        dAr, dAt = self.fiber_matrix_derivatives(r, theta)
        gr, gt, curl = self.base_derivatives(P, r, theta)
        out = 2.0 * np.einsum("ni,nij,nj->n", V1, A, V2)
        pr = np.einsum("ni,nij->nj", P, dAr)
        pt = np.einsum("ni,nij->nj", P, dAt)
        out += U1[:, 0] * np.einsum("nj,nj->n", pr, V2) - U2[:, 0] * np.einsum("nj,nj->n", pr, V1)
        out += U1[:, 1] * np.einsum("nj,nj->n", pt, V2) - U2[:, 1] * np.einsum("nj,nj->n", pt, V1)
        out += np.einsum("ni,ni->n", gr, V1) * U2[:, 0] - np.einsum("ni,ni->n", gr, V2) * U1[:, 0]
        out += np.einsum("ni,ni->n", gt, V1) * U2[:, 1] - np.einsum("ni,ni->n", gt, V2) * U1[:, 1]
        out += curl * (U1[:, 0] * U2[:, 1] - U1[:, 1] * U2[:, 0])
        return out

    def lift_system(self, P, r, theta, U):
        """``(A, a, B)`` such that the fiber part of the horizontal lift of ``U``
        solves ``p^T A v = a`` and ``2 v^T A z = B.z`` on vertical contact vectors."""
        P, r, theta = _batch(P, r, theta)
        U = np.broadcast_to(np.asarray(U, dtype=float), (P.shape[0], 2))
        A = self.fiber_matrix(r, theta)
        dAr, dAt = self.fiber_matrix_derivatives(r, theta)
        ar, at = self.base_coefficients(P, r, theta)
        gr, gt, _ = self.base_derivatives(P, r, theta)
        a = -(ar * U[:, 0] + at * U[:, 1])
        B = (
            -U[:, 0, None] * np.einsum("nji,nj->ni", dAr, P)
            - U[:, 1, None] * np.einsum("nji,nj->ni", dAt, P)
            + U[:, 0, None] * gr
            + U[:, 1, None] * gt
        )
        return np.ascontiguousarray(A), a, B

    def lift_batch(self, P, r, theta, U):
        A, a, B = self.lift_system(P, r, theta, U)
        V, det = kernels.solve_contact(A, np.atleast_2d(P), a, B)
        if np.any(np.abs(det) < SINGULAR_TOL):
            raise NotContactError("degenerate fibration: fiber form is not contact at a sample point")
        return V

    def horizontality_residual(self, P, r, theta, V, U):
        """Max of ``|alpha(X)|`` and ``|d alpha(X, z)|`` over a vertical ξ frame.

        ``d alpha(X, (z, 0))`` is linear in ``z``; its covector is assembled
        once and contracted with the whole frame.
        """
        P, r, theta = _batch(P, r, theta)
        N = P.shape[0]
        V = np.broadcast_to(V, P.shape)
        U = np.broadcast_to(U, (N, 2))
        A = np.ascontiguousarray(self.fiber_matrix(r, theta))
        dAr, dAt = self.fiber_matrix_derivatives(r, theta)
        gr, gt, _ = self.base_derivatives(P, r, theta)
        ar, at = self.base_coefficients(P, r, theta)
        Z, _ = kernels.contact_frames(A, P)
        cov = (2.0 * np.einsum("ni,nij->nj", V, A)
               + U[:, 0, None] * (np.einsum("ni,nij->nj", P, dAr) - gr)
               + U[:, 1, None] * (np.einsum("ni,nij->nj", P, dAt) - gt))
        res = np.abs(np.einsum("ni,nij,nj->n", P, A, V) + ar * U[:, 0] + at * U[:, 1])
        return np.maximum(res, np.abs(np.einsum("nj,njk->nk", cov, Z)).max(axis=1))


@dataclass(frozen=True)
class HamiltonianProfile:
    """``H(p, r, theta)`` with an optional analytic gradient.

    ``gradient(p, r, theta)`` returns ``(grad_p, d_r, d_theta)``; without it
    the derivatives are central differences (great circles in ``p``).
    """

    value: Callable
    gradient: Callable | None = None
    name: str = "custom"
    fd_step: float = 1e-6

    def __call__(self, P, r, theta):
        P = np.asarray(P, dtype=float)
        return np.broadcast_to(np.asarray(self.value(P, r, theta), dtype=float), P.shape[:-1])

    def derivatives(self, P, r, theta):
        P, r, theta = _batch(P, r, theta)
        if self.gradient is not None:
            gp, gr, gt = self.gradient(P, r, theta)
            N = P.shape[0]
            return (np.broadcast_to(np.asarray(gp, dtype=float), P.shape),
                    np.broadcast_to(np.asarray(gr, dtype=float), (N,)),
                    np.broadcast_to(np.asarray(gt, dtype=float), (N,)))
        h = self.fd_step
        F = kernels.householder_complement(P)
        offs = h * np.swapaxes(F, 1, 2)
        rr, tt = r[:, None], theta[:, None]
        D = (self(normalize(P[:, None, :] + offs), rr, tt)
             - self(normalize(P[:, None, :] - offs), rr, tt)) / (2 * h)
        gp = np.einsum("nij,nj->ni", F, D)
        gr = (self(P, r + h, theta) - self(P, r - h, theta)) / (2 * h)
        gt = (self(P, r, theta + h) - self(P, r, theta - h)) / (2 * h)
        return gp, gr, gt

    def decay_constant(self, P, radii=(1e-2, 1e-3), thetas=None) -> float:
        """``max |H| / r^2`` over sample points and small radii."""
        P = np.atleast_2d(np.asarray(P, dtype=float))
        thetas = np.linspace(0, 2 * np.pi, 8, endpoint=False) if thetas is None else thetas
        worst = 0.0
        for rad in radii:
            for th in thetas:
                worst = max(worst, float(np.abs(self(P, rad, th)).max()) / rad**2)
        return worst


def _zero_profile():
    return HamiltonianProfile(
        lambda p, r, t: np.zeros(np.shape(p)[:-1]),
        lambda p, r, t: (np.zeros(np.shape(p)), 0.0, 0.0),
        "zero",
    )


def _unit(i, shape):
    e = np.zeros(shape)
    e[..., i] = 1.0
    return e


def _r2_p1():
    return HamiltonianProfile(
        lambda p, r, t: np.square(r) * p[..., 0],
        lambda p, r, t: (np.square(r)[..., None] * _unit(0, p.shape), 2 * np.asarray(r) * p[..., 0], 0.0),
        "r2_p1",
    )


def _r2_sin_p2():
    return HamiltonianProfile(
        lambda p, r, t: np.square(r) * np.sin(t) * p[..., 1],
        lambda p, r, t: ((np.square(r) * np.sin(t))[..., None] * _unit(1, p.shape),
                         2 * r * np.sin(t) * p[..., 1],
                         r**2 * np.cos(t) * p[..., 1]),
        "r2_sin_p2",
    )


def _r2_mixed():
    def value(p, r, t):
        return np.square(r) * (p[..., 0] * p[..., 2] + np.cos(t) * p[..., 3])

    def grad(p, r, t):
        g = np.zeros(p.shape)
        g[..., 0] = p[..., 2]
        g[..., 2] = p[..., 0]
        g[..., 3] = np.cos(t)
        r = np.asarray(r)
        return (np.square(r)[..., None] * g,
                2 * r * (p[..., 0] * p[..., 2] + np.cos(t) * p[..., 3]),
                -r**2 * np.sin(t) * p[..., 3])

    return HamiltonianProfile(value, grad, "r2_mixed")


PROFILES: dict[str, Callable[[], HamiltonianProfile]] = {
    "zero": _zero_profile,
    "r2_p1": _r2_p1,
    "r2_sin_p2": _r2_sin_p2,
    "r2_mixed": _r2_mixed,
}


def builtin_profile(name: str) -> HamiltonianProfile:
    try:
        return PROFILES[name]()
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


class ContactFibrationDisk(FibrationForm):
    """``alpha = alpha_0 + H(p, r, theta) dtheta`` on ``S^{d-1} x D^2``."""

    def __init__(self, fiber_form, profile: HamiltonianProfile | str):
        self.fiber_form = as_form(fiber_form)
        self.profile = builtin_profile(profile) if isinstance(profile, str) else profile
        self.dim = self.fiber_form.dim

    def fiber_matrix(self, r, theta):
        N = np.size(r)
        return np.broadcast_to(self.fiber_form.generator, (N, self.dim, self.dim))

    def fiber_matrix_derivatives(self, r, theta):
        z = np.zeros((np.size(r), self.dim, self.dim))
        return z, z

    def base_coefficients(self, P, r, theta):
        return np.zeros(np.shape(P)[0]), self.profile(P, r, theta)

    def base_derivatives(self, P, r, theta):
        gp, gr, _ = self.profile.derivatives(P, r, theta)
        return np.zeros_like(gp), gp, gr

    def loop_hamiltonian(self, r0: float) -> Hamiltonian:
        """``G_theta(p) = -H(p, r0, theta)`` with ``theta`` as the time variable."""
        prof = self.profile

        def value(p, t):
            return -prof(p, r0, t)

        def grad(p, t):
            P = np.atleast_2d(p)
            return -prof.derivatives(P, r0, t)[0].reshape(np.shape(p))

        return Hamiltonian(value, grad)


@dataclass(frozen=True)
class LiftResult:
    fiber: np.ndarray
    base: np.ndarray
    alpha_residual: float
    dalpha_residual: float


def horizontal_lift(fib: FibrationForm, p, base, u) -> LiftResult:
    """Horizontal lift of the base vector ``u`` at ``(p, base)``.

    The linear system is assembled by evaluating the total-space ``alpha``
    and ``d alpha`` on a Householder frame of the fiber tangent space.
    """
    p = np.asarray(p, dtype=float)
    r, theta = (float(x) for x in base)
    u = np.asarray(u, dtype=float)
    d = p.shape[0]
    F = kernels.householder_complement(p[None])[0]
    A = np.ascontiguousarray(fib.fiber_matrix(np.array([r]), np.array([theta])))
    Z = kernels.contact_frames(A, p[None])[0][0]
    zero_v, zero_u = np.zeros(d), np.zeros(2)
    nf, nz = d - 1, d - 2

    def at(count):
        return np.tile(p, (count, 1)), np.full(count, r), np.full(count, theta)

    M = np.empty((nf, nf))
    rhs = np.empty(nf)
    M[0] = fib.alpha(*at(nf), F.T, zero_u)
    rhs[0] = -fib.alpha(p, r, theta, zero_v, u)[0]
    # row k + 1, column j: d alpha(F_j, Z_k)
    M[1:] = fib.dalpha(*at(nz * nf), np.tile(F.T, (nz, 1)), zero_u,
                       np.repeat(Z.T, nf, axis=0), zero_u).reshape(nz, nf)
    rhs[1:] = -fib.dalpha(*at(nz), zero_v, u, Z.T, zero_u)
    if abs(np.linalg.det(M)) < SINGULAR_TOL:
        raise NotContactError("singular horizontal-lift system")
    v = F @ np.linalg.solve(M, rhs)
    a_res = abs(fib.alpha(p, r, theta, v, u)[0])
    d_res = float(np.abs(fib.dalpha(*at(nz), v, u, Z.T, zero_u)).max())
    return LiftResult(v, u.copy(), float(a_res), float(d_res))


@dataclass(frozen=True)
class BasePath:
    """Path ``t -> (r(t), theta(t))`` for ``t`` in ``[0, 1]``."""

    position: Callable[[float], tuple]
    velocity: Callable[[float], tuple] | None = None
    label: str = "path"

    def at(self, t):
        return tuple(float(x) for x in self.position(t))

    def speed(self, t, h: float = 1e-6):
        if self.velocity is not None:
            return np.asarray(self.velocity(t), dtype=float)
        a, b = max(0.0, t - h), min(1.0, t + h)
        return (np.asarray(self.position(b)) - np.asarray(self.position(a))) / (b - a)

    @property
    def is_loop(self) -> bool:
        (r0, t0), (r1, t1) = self.at(0.0), self.at(1.0)
        if abs(r0 - r1) > 1e-12:
            return False
        if r0 < 1e-15:
            return True
        return abs(np.angle(np.exp(1j * (t1 - t0)))) < 1e-12

    @classmethod
    def circle(cls, r0: float, theta0: float = 0.0):
        w = 2 * np.pi
        return cls(lambda t: (r0, theta0 + w * t), lambda t: (0.0, w), f"circle(r={r0})")

    @classmethod
    def radial(cls, theta: float, r_start: float, r_end: float):
        dr = r_end - r_start
        return cls(lambda t: (r_start + dr * t, theta), lambda t: (dr, 0.0), f"radial(theta={theta})")

    @classmethod
    def constant(cls, r: float, theta: float):
        return cls(lambda t: (r, theta), lambda t: (0.0, 0.0), "constant")

    @classmethod
    def arc(cls, r: float, theta_start: float, theta_end: float):
        dt = theta_end - theta_start
        return cls(lambda t: (r, theta_start + dt * t), lambda t: (0.0, dt), f"arc(r={r})")

    def then(self, other: "BasePath") -> "BasePath":
        """Concatenation, reparametrized with zero speed at the junction."""

        def s(tau):
            return tau - np.sin(2 * np.pi * tau) / (2 * np.pi)

        def ds(tau):
            return 1.0 - np.cos(2 * np.pi * tau)

        first, second = self, other

        def pos(t):
            return first.position(s(2 * t)) if t <= 0.5 else second.position(s(2 * t - 1))

        def vel(t):
            if t <= 0.5:
                return 2 * ds(2 * t) * first.speed(s(2 * t))
            return 2 * ds(2 * t - 1) * second.speed(s(2 * t - 1))

        return BasePath(pos, vel, f"{first.label}*{second.label}")


@dataclass
class TransportResult:
    inputs: np.ndarray
    outputs: np.ndarray
    max_horizontality_residual: float
    steps: int

    @property
    def endpoints(self):
        return list(zip(self.inputs, self.outputs))


def _seeded_points(d: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), d, count])))
    return normalize(rng.normal(size=(count, d)))


def parallel_transport(fib: FibrationForm, path: BasePath, p0, step: float,
                       track_residuals: bool = True) -> TransportResult:
    """Parallel transport of fiber points along ``path`` (RK4 in the path parameter)."""
    P0 = np.atleast_2d(normalize(np.asarray(p0, dtype=float)))
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    worst = [0.0]

    def field(P, t):
        r, theta = path.at(t)
        u = path.speed(t)
        if not np.any(u):
            return np.zeros_like(P)
        return fib.lift_batch(P, r, theta, u)

    def record(t, P, V):
        if np.any(V):
            r, theta = path.at(t)
            res = fib.horizontality_residual(P, r, theta, V, path.speed(t))
            worst[0] = max(worst[0], float(res.max()))

    out, steps = rk4_sphere(field, P0, 0.0, 1.0, step, record if track_residuals else None)
    return TransportResult(P0, out, worst[0], steps)


def transport_tangent(fib: FibrationForm, path: BasePath, p, w, step: float, offset: float = 1e-6):
    """Image of the tangent vector ``w`` at ``p`` under parallel transport.

    Central differences of the trajectories through ``p ± offset w``.
    """
    p = np.asarray(p, dtype=float)
    W = np.atleast_2d(np.asarray(w, dtype=float))
    starts = np.concatenate([normalize(p + offset * W), normalize(p - offset * W), p[None]])
    res = parallel_transport(fib, path, starts, step, track_residuals=False)
    n = W.shape[0]
    return res.outputs[-1], (res.outputs[:n] - res.outputs[n:2 * n]) / (2 * offset)


@dataclass
class LemmaParallelCheck:
    r0: float
    step: float
    max_distance: float
    transport: TransportResult
    flow_endpoints: np.ndarray


def check_lemma_parallel(fib: ContactFibrationDisk, r0: float, sample_count: int, seed: int,
                         step: float = 1e-3, points=None) -> LemmaParallelCheck:
    """Holonomy around ``gamma_{r0}`` against the flow of ``G_theta = -H(., r0, theta)``.

    The transport is integrated in the loop parameter ``t`` in ``[0, 1]``
    and the Hamiltonian flow in ``theta`` in ``[0, 2pi]``, both with the
    given step.
    """
    if not 0.0 <= r0 < 1.0:
        raise ValueError(f"r0 must lie in [0, 1), got {r0}")
    P = _seeded_points(fib.dim, sample_count, seed) if points is None else np.atleast_2d(points)
    if r0 == 0.0:
        tr = TransportResult(P, P.copy(), 0.0, 0)
        return LemmaParallelCheck(r0, step, 0.0, tr, P.copy())
    tr = parallel_transport(fib, BasePath.circle(r0), P, step)
    flow = hamiltonian_flow(fib.fiber_form, fib.loop_hamiltonian(r0), P, 2 * np.pi, step)
    dist = float(np.linalg.norm(tr.outputs - flow, axis=1).max())
    return LemmaParallelCheck(r0, step, dist, tr, flow)


@dataclass
class RadialTrivialization:
    r_values: np.ndarray
    thetas: np.ndarray
    points: np.ndarray
    H: np.ndarray          # (len(r), len(theta), len(points))
    g: np.ndarray
    radial_component: np.ndarray  # (Phi^* alpha)(d_r) / e^g; zero for horizontal transport
    max_lift_residual: float


def radial_trivialization(fib: FibrationForm, r_values, thetas, points, step: float = 1e-3,
                          fd_offset: float = 1e-5, residual_tol: float = 1e-8) -> RadialTrivialization:
    """Trivialize ``fib`` by radial parallel transport from the central fiber.

    ``Phi(p, r, theta)`` transports ``p`` along the ray at angle ``theta``.
    Writing ``Phi^* alpha = e^g (alpha_0 + H dtheta)``, the conformal factor
    is read off as ``e^g = alpha(dPhi R_0)`` with ``R_0`` the Reeb field of
    the central form, and ``H = alpha(d_theta Phi, d_theta) / e^g``.  The
    ``theta``- and ``p``-derivatives of ``Phi`` are central differences of
    neighbouring trajectories with offset ``fd_offset``.
    """
    r_values = np.sort(np.atleast_1d(np.asarray(r_values, dtype=float)))
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    P = np.atleast_2d(normalize(np.asarray(points, dtype=float)))
    if np.any(r_values <= 0):
        raise ValueError("radii must be positive")
    A0 = fib.fiber_matrix(np.zeros(len(thetas)), thetas)
    if np.abs(A0 - A0[0]).max() > 1e-12:
        raise ValueError("central fiber form depends on theta")
    A0 = np.ascontiguousarray(A0[0])
    R0, det = kernels.solve_contact(A0, P, 1.0, np.zeros_like(P))
    if np.any(np.abs(det) < SINGULAR_TOL):
        raise NotContactError("central fiber form is not contact")
    nt, npt, d = len(thetas), len(P), P.shape[1]
    h = fd_offset
    # variants: 0 base, 1/2 theta +/- h, 3/4 p +/- h R0
    th = np.concatenate([thetas, thetas + h, thetas - h, thetas, thetas])
    TH = np.repeat(th, npt)
    starts = np.concatenate([
        np.tile(P, (3 * nt, 1)),
        np.tile(normalize(P + h * R0), (nt, 1)),
        np.tile(normalize(P - h * R0), (nt, 1)),
    ])
    worst = [0.0]
    radial_u = np.array([1.0, 0.0])

    def field(Q, r):
        return fib.lift_batch(Q, r, TH, radial_u)

    def record(r, Q, V):
        res = fib.horizontality_residual(Q, r, TH, V, radial_u)
        worst[0] = max(worst[0], float(res.max()))

    nr = len(r_values)
    H = np.empty((nr, nt, npt))
    g = np.empty((nr, nt, npt))
    radial = np.empty((nr, nt, npt))
    Q = starts
    r_prev = 0.0
    for i, r in enumerate(r_values):
        Q, _ = rk4_sphere(field, Q, r_prev, r, step, record)
        r_prev = r
        blocks = Q.reshape(5, nt, npt, d)
        base = blocks[0].reshape(-1, d)
        d_theta = ((blocks[1] - blocks[2]) / (2 * h)).reshape(-1, d)
        push_R0 = ((blocks[3] - blocks[4]) / (2 * h)).reshape(-1, d)
        tt = np.repeat(thetas, npt)
        eg = fib.alpha(base, r, tt, push_R0, np.zeros(2))
        pull_theta = fib.alpha(base, r, tt, d_theta, np.array([0.0, 1.0]))
        d_r = fib.lift_batch(base, r, tt, radial_u)
        pull_r = fib.alpha(base, r, tt, d_r, radial_u)
        H[i] = (pull_theta / eg).reshape(nt, npt)
        g[i] = np.log(eg).reshape(nt, npt)
        radial[i] = (pull_r / eg).reshape(nt, npt)
    if worst[0] > residual_tol:
        raise ConvergenceError(
            f"radial lift residual {worst[0]:.3e} exceeds {residual_tol:.1e}"
        )
    return RadialTrivialization(r_values, thetas, P, H, g, radial, worst[0])


@dataclass
class LoopAtInfinity:
    r_values: np.ndarray
    samples: np.ndarray      # G^r = -H(p, r, theta), shape (len(r), ...)
    limit: np.ndarray        # order-2 Richardson extrapolation to r_limit
    increments: np.ndarray   # max |G^{r_{k+1}} - G^{r_k}|
    observed_order: float | None


def _observed_order(h, G):
    # solve (h1^q - h2^q)/(h2^q - h3^q) = D12/D23 for q by bisection
    d12 = float(np.abs(G[1] - G[0]).max())
    d23 = float(np.abs(G[2] - G[1]).max())
    if d23 == 0.0 or d12 == 0.0:
        return None
    target = d12 / d23

    def ratio(q):
        return (h[0] ** q - h[1] ** q) / (h[1] ** q - h[2] ** q)

    lo, hi = 0.05, 12.0
    if (ratio(lo) - target) * (ratio(hi) - target) > 0:
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if (ratio(lo) - target) * (ratio(mid) - target) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def loop_at_infinity(profile: Callable, r_sequence: Sequence[float], thetas, points,
                     r_limit: float = 1.0, tol: float = 1e-6) -> LoopAtInfinity:
    """Hamiltonians ``G^r_theta = -H(., r, theta)`` of the holonomy loops as ``r -> r_limit``.

    ``profile(P, r, thetas)`` returns trivialized ``H`` values with shape
    ``(len(thetas), len(P))``.  The limit is the order-2 Richardson
    extrapolation of the last two radii; with three or more radii the
    consecutive extrapolations must agree within ``tol``.
    """
    r = np.asarray(r_sequence, dtype=float)
    if len(r) < 2 or np.any(np.diff(r) <= 0) or r[-1] >= r_limit:
        raise ValueError("r_sequence must increase strictly towards r_limit")
    G = np.stack([-np.asarray(profile(points, rk, thetas), dtype=float) for rk in r])
    h = r_limit - r

    def richardson(i, j):
        return (h[i] ** 2 * G[j] - h[j] ** 2 * G[i]) / (h[i] ** 2 - h[j] ** 2)

    limit = richardson(len(r) - 2, len(r) - 1)
    if len(r) >= 3:
        prev = richardson(len(r) - 3, len(r) - 2)
        gap = float(np.abs(limit - prev).max())
        if gap > tol:
            raise ConvergenceError(f"extrapolated limits disagree by {gap:.3e} (tol {tol:.1e})")
    inc = np.array([float(np.abs(G[k + 1] - G[k]).max()) for k in range(len(r) - 1)])
    order = _observed_order(h[-3:], G[-3:]) if len(r) >= 3 else None
    return LoopAtInfinity(r, G, limit, inc, order)
