"""Verification suites: configuration, the tolerance table and the checks.

Every check returns ``(max_residual, details)``; it passes when the residual
is at most the tolerance registered for its family (the part of the check
name before any ``[...]``).  Checks draw samples from a counter-based
generator keyed by the suite seed and the check name, so each check is
reproducible on its own.
"""
from __future__ import annotations

import math
import time
import zlib
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import oracles
from .contact import (
    Hamiltonian,
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
from .degree import (
    AlmostContactPoint,
    StructureSphere,
    conjugation_path,
    eta_invariance_residual,
    evaluate_sphere_at_point,
    h_extend,
    quaternionic_frame,
    roundtrip_identity,
    sphere_degree,
    structure_sphere_degree,
)
from .errors import ConfigError
from .fibration import (
    BasePath,
    ContactFibrationDisk,
    HamiltonianProfile,
    builtin_profile,
    check_lemma_parallel,
    horizontal_lift,
    loop_at_infinity,
    parallel_transport,
    radial_trivialization,
    transport_tangent,
)
from .integrate import normalize
from .kernels import householder_complement
from .quaternionic import (
    build_quaternionic_triple,
    combine,
    complexify,
    det_winding,
    exp_scaled_structure,
    realify,
    sphere_direction,
    unitary_loop,
)
from .report import CheckResult, VerificationReport
from .sphere_family import (
    LinearContactSphere,
    SphereFamilyFibration,
    conformal_factor,
    lifted_polar_field,
    pullback_hamiltonian,
    reeb_identification,
    reeb_term_polar_field,
    transport_flow,
    transport_flow_ode,
)

# Default tolerance per check family.  Integer-valued checks use 0.
TOLERANCES: dict[str, float] = {
    "quaternion.relations": 1e-13,
    "quaternion.combine_square": 1e-13,
    "quaternion.exp_series": 1e-12,
    "quaternion.complexify": 1e-12,
    "quaternion.winding": 0.0,
    "quaternion.winding_resample": 0.0,
    "quaternion.winding_additive": 0.0,
    "contact.nondegeneracy": 1e-8,
    "contact.reeb_residuals": 1e-10,
    "contact.reeb_closed_form": 1e-10,
    "contact.reeb_oracle": 1e-10,
    "contact.two_form_oracle": 1e-6,
    "contact.hamiltonian_residuals": 1e-8,
    "contact.hamiltonian_linearity": 1e-9,
    "contact.reeb_flow": 1e-8,
    "contact.flow_order": 0.5,
    "contact.complex_tangencies": 1e-10,
    "transport.lemma_parallel": 1e-5,
    "transport.lemma_parallel_order": 0.5,
    "transport.horizontality": 1e-8,
    "transport.zero_profile": 1e-12,
    "transport.constant_path": 1e-12,
    "transport.contactomorphism": 1e-6,
    "transport.concatenation": 1e-8,
    "transport.decay_constant": 10.0,
    "transport.radial_fixed_point": 1e-6,
    "transport.radial_zero": 1e-9,
    "transport.loop_at_infinity_trivial": 1e-12,
    "sphere.lift_closed_form": 1e-8,
    "sphere.lift_horizontality": 1e-10,
    "sphere.transport_flow_ode": 1e-7,
    "sphere.transport_flow_group": 1e-12,
    "sphere.transport_flow_period": 1e-12,
    "sphere.pullback_analytic": 1e-9,
    "sphere.pullback_spread": 1e-9,
    "sphere.pullback_ode": 1e-6,
    "sphere.conformal_factor": 1e-6,
    "sphere.loop_at_infinity": 1e-6,
    "sphere.reeb_identification": 1e-7,
    "sphere.reeb_commutes": 1e-7,
    "sphere.reeb_gram": 0.1,
    "degree.winding": 0.0,
    "degree.resolution_stable": 0.0,
    "degree.conjugation": 1e-12,
    "degree.h_extend": 1e-13,
    "degree.eta_invariance": 1e-10,
    "degree.evaluated_sphere": 0.0,
    "degree.constant_sphere": 0.0,
    "roundtrip.identity": 1e-10,
    "roundtrip.idempotence": 1e-10,
}

SUITES = ("quaternion", "contact", "transport", "sphere-family", "degree", "roundtrip", "all")
POLE_MARGIN = 1e-3
LEMMA_PROFILES = ("r2_p1", "r2_sin_p2", "r2_mixed")
LEMMA_RADII = (0.3, 0.5)
ORDER_STEPS = (0.2, 0.1, 0.05)


@dataclass
class SuiteConfig:
    suite: str = "all"
    n: int = 1
    m: int = 3
    samples: int = 20
    seed: int = 0
    gridTheta: int = 16
    gridPhi: int = 8
    rk4Step: float = 1e-3
    tolerances: dict = field(default_factory=dict)

    def validate(self) -> "SuiteConfig":
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        for name in ("n", "m", "samples", "seed", "gridTheta", "gridPhi"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"{name} must be an integer, got {val!r}")
        if self.n < 0:
            raise ConfigError("n must be non-negative")
        for name in ("m", "samples", "gridTheta", "gridPhi"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.gridTheta < 2 or self.gridPhi < 2:
            raise ConfigError("grids need at least two samples per angle")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not (isinstance(self.rk4Step, (int, float)) and 0 < self.rk4Step <= 0.1):
            raise ConfigError(f"rk4Step must lie in (0, 0.1], got {self.rk4Step!r}")
        for key, val in self.tolerances.items():
            if key not in TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}")
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"tolerance {key} must be a positive number, got {val!r}")
        return self

    def tolerance(self, family: str) -> float:
        return float(self.tolerances.get(family, TOLERANCES[family]))

    def echo(self) -> dict:
        return asdict(self)


def rng_for(cfg: SuiteConfig, name: str) -> np.random.Generator:
    key = [cfg.seed & 0xFFFFFFFF, cfg.seed >> 32, zlib.crc32(name.encode("utf-8"))]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def random_points(rng, count: int, d: int) -> np.ndarray:
    return normalize(rng.normal(size=(count, d)))


def random_directions(rng, count: int) -> np.ndarray:
    return normalize(rng.normal(size=(count, 3)))


def angle_grid(cfg: SuiteConfig):
    thetas = np.linspace(0.0, 2 * np.pi, cfg.gridTheta, endpoint=False)
    phis = np.linspace(POLE_MARGIN, np.pi - POLE_MARGIN, cfg.gridPhi)
    return thetas, phis


def _tangent(rng, P):
    W = rng.normal(size=P.shape)
    return W - np.einsum("ni,ni->n", W, P)[:, None] * P



# ---------------------------------------------------------------- quaternion

def _quaternion_checks(cfg: SuiteConfig):
    out = []
    for m in range(1, cfg.m + 1):
        T = build_quaternionic_triple(m)

        def relations(cfg, rng, T=T):
            res = T.relation_residuals()
            return max(res.values()), res

        def combine_square(cfg, rng, T=T):
            th, ph = angle_grid(cfg)
            E = np.concatenate([sphere_direction(th[:, None], ph[None]).reshape(-1, 3),
                                random_directions(rng, 100)])
            C = combine(T, E)
            return float(np.abs(C @ C + np.eye(T.dim)).max()), {"directions": len(E)}

        def exp_series(cfg, rng, T=T):
            worst = 0.0
            for _ in range(100):
                c = rng.uniform(0.5, 1.5)
                F = c * combine(T, random_directions(rng, 1)[0])
                t = rng.uniform(-2 * np.pi, 2 * np.pi)
                worst = max(worst, float(np.abs(exp_scaled_structure(F, t, c) - oracles.series_exp(F, t)).max()))
            return worst, {}

        def complexify_check(cfg, rng, T=T, m=m):
            worst = 0.0
            for th in np.linspace(0, 2 * np.pi, 9):
                A = np.cos(th) * np.eye(T.dim) + np.sin(th) * T.I
                Z = complexify(A, T.I)
                worst = max(worst, float(np.abs(Z - np.exp(1j * th) * np.eye(2 * m)).max()),
                            float(np.abs(realify(Z, T.I) - A).max()))
            return worst, {}

        def winding(cfg, rng, T=T, m=m):
            w = det_winding(unitary_loop(T.I, 512), T.I)
            return abs(w - 2 * m), {"winding": w, "expected": 2 * m}

        def winding_resample(cfg, rng, T=T):
            a = det_winding(unitary_loop(T.I, 512), T.I)
            b = det_winding(unitary_loop(T.I, 1024), T.I)
            return abs(a - b), {"winding512": a, "winding1024": b}

        def winding_additive(cfg, rng, T=T):
            th = np.linspace(0, 2 * np.pi, 512)
            eye = np.eye(T.dim)
            L1 = [np.cos(t) * eye + np.sin(t) * T.I for t in th]
            L2 = [np.cos(3 * t) * eye - np.sin(3 * t) * T.I for t in th]
            L1[-1], L2[-1] = L1[0], L2[0]
            w1, w2 = det_winding(L1, T.I), det_winding(L2, T.I)
            w12 = det_winding([a @ b for a, b in zip(L1, L2)], T.I)
            return abs(w12 - w1 - w2), {"w1": w1, "w2": w2, "product": w12}

        tag = f"[m={m}]"
        out += [
            ("quaternion.relations" + tag, relations),
            ("quaternion.combine_square" + tag, combine_square),
            ("quaternion.exp_series" + tag, exp_series),
            ("quaternion.complexify" + tag, complexify_check),
            ("quaternion.winding" + tag, winding),
            ("quaternion.winding_resample" + tag, winding_resample),
            ("quaternion.winding_additive" + tag, winding_additive),
        ]
    return out


# ------------------------------------------------------------------- contact

def _contact_checks(cfg: SuiteConfig):
    T = build_quaternionic_triple(cfg.n + 1)
    d = T.dim
    npts = 10 * cfg.samples

    def family_grid(cfg):
        th, ph = angle_grid(cfg)
        return sphere_direction(th[:, None], ph[None]).reshape(-1, 3)

    def nondegeneracy(cfg, rng):
        P = random_points(rng, npts, d)
        expected = 2.0 ** ((d - 2) // 2)
        worst, lo = 0.0, np.inf
        for e in family_grid(cfg):
            pf = contact_nondegeneracy(combine(T, e), P)
            worst = max(worst, float(np.abs(pf - expected).max()))
            lo = min(lo, float(pf.min()))
        return worst, {"expected": expected, "min": lo, "points": npts}

    def reeb_res(cfg, rng):
        P = random_points(rng, npts, d)
        th = np.linspace(0, 2 * np.pi, 10, endpoint=False)
        ph = np.linspace(POLE_MARGIN, np.pi - POLE_MARGIN, 10)
        mats = list(T.as_tuple()) + list(combine(T, sphere_direction(th[:, None], ph[None]).reshape(-1, 3)))
        worst = 0.0
        for A in mats:
            worst = max(worst, max(reeb_residuals(A, P, reeb_field(A, P)).values()))
        return worst, {"forms": len(mats)}

    def reeb_closed(cfg, rng):
        P = random_points(rng, npts, d)
        mats = list(T.as_tuple()) + list(combine(T, random_directions(rng, 20)))
        worst = max(float(np.abs(reeb_field(A, P) + P @ A.T).max()) for A in mats)
        return worst, {}

    def reeb_oracle(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        worst = 0.0
        for e in random_directions(rng, 5):
            A = combine(T, e)
            R = reeb_field(A, P)
            for p, r in zip(P, R):
                worst = max(worst, float(np.abs(r - oracles.reeb_by_lstsq(A, p)).max()))
        return worst, {}

    def two_form_oracle(cfg, rng):
        count = 5 * cfg.samples
        P = random_points(rng, count, d)
        U, V = normalize(_tangent(rng, P)), normalize(_tangent(rng, P))
        E = random_directions(rng, count)
        worst, asym = 0.0, 0.0
        for p, u, v, e in zip(P, U, V, E):
            A = combine(T, e)
            val = two_form(A, p, u, v)
            worst = max(worst, abs(val - oracles.exterior_derivative_fd(A, p, u, v)))
            asym = max(asym, abs(val + two_form(A, p, v, u)))
        return max(worst, asym), {"antisymmetry": asym, "triples": count}

    def ham_residuals(cfg, rng):
        P = random_points(rng, npts, d)
        A = combine(T, random_directions(rng, 1)[0])
        H_analytic = Hamiltonian.static(lambda p: p[..., 0], lambda p: np.eye(d)[0] * np.ones_like(p))
        H_fd = Hamiltonian.static(lambda p: p[..., 0] * p[..., 1] + p[..., 2] ** 3)
        worst = 0.0
        for H in (H_analytic, H_fd, Hamiltonian.constant(0.0)):
            X = hamiltonian_vector_field(A, H, P)
            worst = max(worst, max(hamiltonian_residuals(A, H, P, X).values()))
        zero = float(np.abs(hamiltonian_vector_field(A, 0.0, P)).max())
        reeb = float(np.abs(hamiltonian_vector_field(A, 1.0, P) - reeb_field(A, P)).max())
        return max(worst, zero, reeb), {"zeroField": zero, "unitIsReeb": reeb}

    def ham_linearity(cfg, rng):
        P = random_points(rng, npts, d)
        A = combine(T, random_directions(rng, 1)[0])
        a, b = rng.normal(size=2)
        g1 = lambda p: np.broadcast_to(np.eye(d)[1], p.shape)
        H1 = Hamiltonian.static(lambda p: p[..., 1], g1)
        H2 = Hamiltonian.static(lambda p: p[..., 0] * p[..., 3],
                                lambda p: np.stack([p[..., 3]] + [0 * p[..., 0]] * 2 + [p[..., 0]]
                                                   + [0 * p[..., 0]] * (d - 4), axis=-1))
        H = Hamiltonian.static(lambda p: a * H1(p) + b * H2(p),
                               lambda p: a * H1.gradient(p, 0) + b * H2.gradient(p, 0))
        lhs = hamiltonian_vector_field(A, H, P)
        rhs = a * hamiltonian_vector_field(A, H1, P) + b * hamiltonian_vector_field(A, H2, P)
        return float(np.abs(lhs - rhs).max()), {}

    def reeb_flow(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        K = T.K
        t = 1.3
        out = hamiltonian_flow(K, 1.0, P, t, cfg.rk4Step)
        ref = P @ exp_scaled_structure(-K, t, 1.0).T
        start = hamiltonian_flow(K, 1.0, P, 0.0, cfg.rk4Step)
        return max(float(np.abs(out - ref).max()), float(np.abs(start - P).max())), {"time": t}

    def flow_order(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        A = combine(T, random_directions(rng, 1)[0])
        H = Hamiltonian.static(lambda p: p[..., 0] + 0.5 * p[..., 1] * p[..., 2])
        ref = hamiltonian_flow(A, H, P, 1.0, 0.025 / 4)
        errs = [float(np.linalg.norm(hamiltonian_flow(A, H, P, 1.0, h) - ref, axis=1).max())
                for h in (0.2, 0.1, 0.05)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        return max(0.0, 4.0 - min(orders)), {"errors": errs, "orders": orders}

    def tangencies(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        worst, dims = 0.0, set()
        for e in random_directions(rng, 10):
            j = combine(T, e)
            Z = np.atleast_3d(contact_plane_frame(j, P))
            dims.add(int(Z.shape[2]))
            jZ = np.einsum("ij,njk->nik", j, Z)
            proj = np.einsum("nia,nja,njk->nik", Z, Z, jZ)
            worst = max(worst, float(np.abs(jZ - proj).max()))
            worst = max(worst, float(np.abs(evaluate_form(j, P[:, None, :], np.swapaxes(Z, 1, 2))).max()))
        return worst + (0.0 if dims == {d - 2} else 1.0), {"xiDims": sorted(dims)}

    return [
        ("contact.nondegeneracy", nondegeneracy),
        ("contact.reeb_residuals", reeb_res),
        ("contact.reeb_closed_form", reeb_closed),
        ("contact.reeb_oracle", reeb_oracle),
        ("contact.two_form_oracle", two_form_oracle),
        ("contact.hamiltonian_residuals", ham_residuals),
        ("contact.hamiltonian_linearity", ham_linearity),
        ("contact.reeb_flow", reeb_flow),
        ("contact.flow_order", flow_order),
        ("contact.complex_tangencies", tangencies),
    ]


# ----------------------------------------------------------------- transport

def _transport_checks(cfg: SuiteConfig):
    fiber = build_quaternionic_triple(1).I
    d = fiber.shape[0]
    horizontality = {"worst": 0.0}
    out = []

    for name in LEMMA_PROFILES:
        for r0 in LEMMA_RADII:
            def lemma(cfg, rng, name=name, r0=r0):
                fib = ContactFibrationDisk(fiber, name)
                P = random_points(rng, cfg.samples, d)
                res = check_lemma_parallel(fib, r0, cfg.samples, cfg.seed, cfg.rk4Step, points=P)
                h = res.transport.max_horizontality_residual
                horizontality["worst"] = max(horizontality["worst"], h)
                return res.max_distance, {"horizontality": h, "steps": res.transport.steps}

            out.append((f"transport.lemma_parallel[{name},r0={r0}]", lemma))

    def horizontality_check(cfg, rng):
        return horizontality["worst"], {"source": "lemma_parallel transports"}

    out.append(("transport.horizontality", horizontality_check))

    for name in LEMMA_PROFILES:
        def order(cfg, rng, name=name):
            fib = ContactFibrationDisk(fiber, name)
            P = random_points(rng, cfg.samples, d)
            dists = [check_lemma_parallel(fib, 0.5, cfg.samples, cfg.seed, h, points=P).max_distance
                     for h in ORDER_STEPS]
            orders = [math.log2(dists[i] / dists[i + 1]) for i in range(len(dists) - 1)]
            return max(0.0, 4.0 - min(orders)), {"steps": list(ORDER_STEPS), "distances": dists,
                                                 "orders": orders}

        out.append((f"transport.lemma_parallel_order[{name}]", order))

    def zero_profile(cfg, rng):
        fib = ContactFibrationDisk(fiber, "zero")
        P = random_points(rng, cfg.samples, d)
        return check_lemma_parallel(fib, 0.5, cfg.samples, cfg.seed, cfg.rk4Step, points=P).max_distance, {}

    def constant_path(cfg, rng):
        fib = ContactFibrationDisk(fiber, "r2_mixed")
        P = random_points(rng, cfg.samples, d)
        res = parallel_transport(fib, BasePath.constant(0.4, 1.1), P, cfg.rk4Step)
        return float(np.abs(res.outputs - P).max()), {}

    def contactomorphism(cfg, rng):
        fib = ContactFibrationDisk(fiber, "r2_mixed")
        worst = 0.0
        for p in random_points(rng, min(cfg.samples, 5), d):
            Z = contact_plane_frame(fiber, p)
            q, W = transport_tangent(fib, BasePath.circle(0.5), p, Z.T, cfg.rk4Step)
            W = W / np.linalg.norm(W, axis=1, keepdims=True)
            worst = max(worst, float(np.abs(evaluate_form(fiber, q, W)).max()))
        return worst, {}

    def concatenation(cfg, rng):
        fib = ContactFibrationDisk(fiber, "r2_sin_p2")
        P = random_points(rng, min(cfg.samples, 5), d)
        first = BasePath.radial(0.7, 0.1, 0.5)
        second = BasePath.arc(0.5, 0.7, 2.0)
        mid = parallel_transport(fib, first, P, cfg.rk4Step, track_residuals=False).outputs
        two = parallel_transport(fib, second, mid, cfg.rk4Step, track_residuals=False).outputs
        one = parallel_transport(fib, first.then(second), P, cfg.rk4Step / 2, track_residuals=False).outputs
        return float(np.abs(one - two).max()), {}

    def decay(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        consts = {name: builtin_profile(name).decay_constant(P) for name in LEMMA_PROFILES}
        return max(consts.values()), consts

    def radial_fixed_point(cfg, rng):
        prof = HamiltonianProfile(lambda p, r, t: np.square(r) * (1.0 + 0.5 * np.cos(t)) + 0 * p[..., 0],
                                  name="p_independent")
        fib = ContactFibrationDisk(fiber, prof)
        P = random_points(rng, cfg.samples, d)
        r = np.array([0.2, 0.5, 0.8])
        th = np.linspace(0, 2 * np.pi, 6, endpoint=False)
        res = radial_trivialization(fib, r, th, P, step=cfg.rk4Step * 10)
        expected = (r[:, None] ** 2 * (1 + 0.5 * np.cos(th))[None])[:, :, None]
        return max(float(np.abs(res.H - expected).max()), float(np.abs(res.g).max())), {}

    def radial_zero(cfg, rng):
        fib = ContactFibrationDisk(fiber, "zero")
        P = random_points(rng, cfg.samples, d)
        res = radial_trivialization(fib, [0.3, 0.9], np.linspace(0, 2 * np.pi, 4, endpoint=False), P,
                                    step=cfg.rk4Step * 10)
        return max(float(np.abs(res.H).max()), float(np.abs(res.g).max())), {}

    def trivial_loop(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        th = np.linspace(0, 2 * np.pi, 8, endpoint=False)
        zero = builtin_profile("zero")
        res = loop_at_infinity(lambda Q, r, t: zero(Q[None, :, :], r, t[:, None]),
                               [0.9, 0.95, 0.99], th, P)
        return float(np.abs(res.limit).max()), {}

    out += [
        ("transport.zero_profile", zero_profile),
        ("transport.constant_path", constant_path),
        ("transport.contactomorphism", contactomorphism),
        ("transport.concatenation", concatenation),
        ("transport.decay_constant", decay),
        ("transport.radial_fixed_point", radial_fixed_point),
        ("transport.radial_zero", radial_zero),
        ("transport.loop_at_infinity_trivial", trivial_loop),
    ]
    return out


# ------------------------------------------------------------- sphere family

def _sphere_checks(cfg: SuiteConfig):
    S = LinearContactSphere.on_sphere(cfg.n)
    fib = SphereFamilyFibration(S)
    d = S.dim

    def lift_closed_form(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        th, ph = angle_grid(cfg)
        worst, printed = 0.0, 0.0
        for t in th:
            for f in ph:
                for p in P:
                    lift = horizontal_lift(fib, p, (f, t), np.array([1.0, 0.0]))
                    v, _ = lifted_polar_field(S, t, f, p)
                    worst = max(worst, float(np.abs(lift.fiber - v).max()))
                w, u = reeb_term_polar_field(S, t, f, P)
                printed = max(printed, float(fib.horizontality_residual(P, f, t, w, u).max()))
        return worst, {"reebTermSignResidual": printed}

    def lift_horizontality(cfg, rng):
        count = 100
        th = rng.uniform(0, 2 * np.pi, count)
        ph = rng.uniform(POLE_MARGIN, np.pi - POLE_MARGIN, count)
        P = random_points(rng, count, d)
        V = np.stack([lifted_polar_field(S, t, f, p)[0] for t, f, p in zip(th, ph, P)])
        return float(fib.horizontality_residual(P, ph, th, V, np.array([1.0, 0.0])).max()), {}

    def flow_ode(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        worst = 0.0
        for t, f in zip(rng.uniform(0, 2 * np.pi, 4), (0.5, 1.5, np.pi, 2 * np.pi)):
            worst = max(worst, float(np.abs(transport_flow_ode(S, t, f, P, cfg.rk4Step * 10)
                                            - transport_flow(S, t, f, P)).max()))
        return worst, {}

    def flow_group(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        worst = 0.0
        for t, a, b in rng.uniform(0, 2 * np.pi, (10, 3)):
            lhs = transport_flow(S, t, a + b, P)
            rhs = transport_flow(S, t, b, transport_flow(S, t, a, P))
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return worst, {}

    def flow_period(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        worst = max(float(np.abs(transport_flow(S, t, 2 * np.pi, P) + P).max())
                    for t in rng.uniform(0, 2 * np.pi, 5))
        start = float(np.abs(transport_flow(S, 1.0, 0.0, P) - P).max())
        return max(worst, start), {}

    def pullback_analytic(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        th, ph = angle_grid(cfg)
        worst = 0.0
        for f in list(ph) + [0.0, np.pi]:
            for t in th:
                worst = max(worst, float(np.abs(pullback_hamiltonian(S, t, f, P) - np.sin(f / 2) ** 2).max()))
        return worst, {"atPi": float(pullback_hamiltonian(S, 0.3, np.pi, P[0]))}

    def pullback_spread(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        th, ph = angle_grid(cfg)
        spread = 0.0
        for f in ph:
            vals = np.concatenate([pullback_hamiltonian(S, t, f, P) for t in th])
            spread = max(spread, float(vals.max() - vals.min()))
        return spread, {}

    ode_cache = {}

    def ode_trivialization(cfg, rng):
        if "res" not in ode_cache:
            P = random_points(rng, cfg.samples, d)
            th, ph = angle_grid(cfg)
            ode_cache["res"] = radial_trivialization(fib, ph, th, P, step=cfg.rk4Step)
        return ode_cache["res"]

    def pullback_ode(cfg, rng):
        res = ode_trivialization(cfg, rng)
        expected = np.sin(res.r_values / 2)[:, None, None] ** 2
        return float(np.abs(res.H - expected).max()), {
            "liftResidual": res.max_lift_residual,
            "radialComponent": float(np.abs(res.radial_component).max()),
        }

    def conformal(cfg, rng):
        res = ode_trivialization(cfg, rng)
        th, ph = angle_grid(cfg)
        P = random_points(rng, cfg.samples, d)
        analytic = max(float(np.abs(conformal_factor(S, t, f, P)).max()) for t in th for f in ph)
        return max(float(np.abs(res.g).max()), analytic), {"analytic": analytic,
                                                            "ode": float(np.abs(res.g).max())}

    def infinity(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        th = np.linspace(0, 2 * np.pi, cfg.gridTheta, endpoint=False)

        def prof(Q, r, thetas):
            return np.stack([pullback_hamiltonian(S, t, r, Q) for t in thetas])

        excess = 0.0
        bounds = {}
        for eps in (1e-1, 1e-2):
            G = -prof(P, np.pi - eps, th)
            gap = float(np.abs(G + 1).max())
            bounds[str(eps)] = gap
            excess = max(excess, gap - eps**2 / 4)
        res = loop_at_infinity(prof, [np.pi - 0.04, np.pi - 0.02, np.pi - 0.01], th, P,
                               r_limit=np.pi, tol=cfg.tolerance("sphere.loop_at_infinity"))
        limit_err = float(np.abs(res.limit + 1).max())
        return max(excess, limit_err), {"gapAtEps": bounds, "limitError": limit_err,
                                        "observedOrder": res.observed_order}

    def identification(cfg, rng):
        P = random_points(rng, 5 * cfg.samples, d)
        tol = cfg.tolerance("sphere.reeb_identification")
        ri = reeb_identification(S, len(P), cfg.seed, step=1e-2, tol=tol, points=P)
        details = {
            "sign": ri.sign,
            "endpointDistance": {str(k): v for k, v in ri.endpoint_distance.items()},
            "endpointMatches": ri.endpoint_matches,
            "checkpointDistance": {str(k): v for k, v in ri.checkpoint_distance.items()},
            "checkpoints": list(ri.checkpoints),
        }
        if ri.sign is None:
            return math.inf, details
        return ri.checkpoint_distance[ri.sign], details

    def commutes(cfg, rng):
        P = random_points(rng, cfg.samples, d)
        K = S.triple.K
        rot = exp_scaled_structure(K, 0.7, 1.0)
        flow = lambda Q: hamiltonian_flow(K, -1.0, Q, 2.0, 1e-2)
        return float(np.abs(flow(P @ rot.T) - flow(P) @ rot.T).max()), {}

    def gram(cfg, rng):
        P = random_points(rng, 5 * cfg.samples, d)
        R = np.stack([reeb_field(M, P) for M in S.triple.as_tuple()], axis=1)
        G = np.linalg.det(np.einsum("nai,nbi->nab", R, R))
        return float(1.0 - G.min()), {"minGram": float(G.min())}

    return [
        ("sphere.lift_closed_form", lift_closed_form),
        ("sphere.lift_horizontality", lift_horizontality),
        ("sphere.transport_flow_ode", flow_ode),
        ("sphere.transport_flow_group", flow_group),
        ("sphere.transport_flow_period", flow_period),
        ("sphere.pullback_analytic", pullback_analytic),
        ("sphere.pullback_spread", pullback_spread),
        ("sphere.pullback_ode", pullback_ode),
        ("sphere.conformal_factor", conformal),
        ("sphere.loop_at_infinity", infinity),
        ("sphere.reeb_identification", identification),
        ("sphere.reeb_commutes", commutes),
        ("sphere.reeb_gram", gram),
    ]


# -------------------------------------------------------------------- degree

def random_almost_contact(rng, k: int) -> AlmostContactPoint:
    """Seeded ``(v, j)`` in ``R^k`` (``k`` odd): ``j`` a random conjugate of the standard structure."""
    v = normalize(rng.normal(size=k))
    B = householder_complement(v[None])[0]
    h = k - 1
    J0 = np.kron(np.eye(h // 2), np.array([[0.0, -1.0], [1.0, 0.0]]))
    O, _ = np.linalg.qr(rng.normal(size=(h, h)))
    return AlmostContactPoint(v, B, O @ J0 @ O.T)


def _degree_checks(cfg: SuiteConfig):
    out = []
    for m in range(1, cfg.m + 1):
        T = build_quaternionic_triple(m)

        def winding(cfg, rng, T=T, m=m):
            w = sphere_degree(T, 512)
            return abs(w - 2 * m), {"winding": w, "expected": 2 * m}

        def stable(cfg, rng, T=T):
            ws = [sphere_degree(T, r) for r in (64, 128, 256, 512, 1024)]
            return max(ws) - min(ws), {"windings": ws}

        def conjugation(cfg, rng, T=T):
            worst = 0.0
            eye = np.eye(T.dim)
            for th in np.linspace(0, 2 * np.pi, 64):
                J_th = np.cos(th) * T.J + np.sin(th) * T.K
                for ph in np.linspace(0, np.pi, cfg.gridPhi):
                    P, It = conjugation_path(T, th, ph, tol=np.inf)
                    worst = max(worst, float(np.abs(P.T @ P - eye).max()),
                                float(np.abs(It - (np.cos(ph) * T.I + np.sin(ph) * J_th)).max()))
                P, _ = conjugation_path(T, th, np.pi, tol=np.inf)
                worst = max(worst, float(np.abs(P - (np.cos(th) * eye + np.sin(th) * T.I) @ T.J).max()))
            return worst, {}

        def hext(cfg, rng, T=T):
            k = T.dim - 1
            worst = 0.0
            for _ in range(100):
                M = h_extend(random_almost_contact(rng, k))
                worst = max(worst, float(np.abs(M @ M + np.eye(k + 1)).max()),
                            float(np.abs(M.T @ M - np.eye(k + 1)).max()), float(np.abs(M + M.T).max()))
            return worst, {}

        def eta(cfg, rng, T=T):
            worst = 0.0
            for q in random_points(rng, 5, T.dim):
                worst = max(worst, eta_invariance_residual(T, quaternionic_frame(T, q)))
            return worst, {}

        def evaluated(cfg, rng, T=T, m=m):
            q = random_points(rng, 1, T.dim)[0]
            frame = quaternionic_frame(T, q)
            th = np.linspace(0, 2 * np.pi, cfg.gridTheta)
            ph = np.linspace(0, np.pi, cfg.gridPhi)
            sphere = evaluate_sphere_at_point(T, frame, th, ph)
            w = structure_sphere_degree(sphere)
            return abs(w - 2 * m), {"winding": w, "structureDefect": sphere.max_structure_defect()}

        tag = f"[m={m}]"
        out += [
            ("degree.winding" + tag, winding),
            ("degree.resolution_stable" + tag, stable),
            ("degree.conjugation" + tag, conjugation),
            ("degree.h_extend" + tag, hext),
            ("degree.eta_invariance" + tag, eta),
            ("degree.evaluated_sphere" + tag, evaluated),
        ]

    def constant(cfg, rng):
        T = build_quaternionic_triple(1)
        th = np.linspace(0, 2 * np.pi, 16)
        ph = np.linspace(0, np.pi, 8)
        grid = np.broadcast_to(T.I, (len(th), len(ph), 4, 4)).copy()
        return abs(structure_sphere_degree(StructureSphere(th, ph, grid))), {}

    out.append(("degree.constant_sphere", constant))
    return out


# ----------------------------------------------------------------- roundtrip

def _roundtrip_checks(cfg: SuiteConfig):
    out = []
    for m in range(1, cfg.m + 1):
        T = build_quaternionic_triple(m)
        for label, j in zip("IJK", T.as_tuple()):
            def identity(cfg, rng, T=T, j=j):
                _, dist = roundtrip_identity(j)
                q = random_points(rng, 1, T.dim)[0]
                _, framed = roundtrip_identity(j, quaternionic_frame(T, q))
                return dist, {"quaternionicFrameDistance": framed}

            def idempotence(cfg, rng, j=j):
                c, _ = roundtrip_identity(j)
                cc, _ = roundtrip_identity(c)
                return float(np.abs(cc - c).max()), {}

            out.append((f"roundtrip.identity[m={m},{label}]", identity))
            out.append((f"roundtrip.idempotence[m={m},{label}]", idempotence))
    return out


BUILDERS = {
    "quaternion": _quaternion_checks,
    "contact": _contact_checks,
    "transport": _transport_checks,
    "sphere-family": _sphere_checks,
    "degree": _degree_checks,
    "roundtrip": _roundtrip_checks,
}


def family_of(name: str) -> str:
    return name.split("[", 1)[0]


def run_check(cfg: SuiteConfig, name: str, fn) -> CheckResult:
    tol = cfg.tolerance(family_of(name))
    start = time.perf_counter()
    try:
        residual, details = fn(cfg, rng_for(cfg, name))
        residual = float(residual)
        passed = math.isfinite(residual) and residual <= tol
        return CheckResult(name, residual, tol, passed, time.perf_counter() - start, details)
    except Exception as exc:  # recorded as a failed check, never raised
        return CheckResult(name, None, tol, False, time.perf_counter() - start,
                           error=f"{type(exc).__name__}: {exc}")


def suite_checks(cfg: SuiteConfig):
    names = list(BUILDERS) if cfg.suite == "all" else [cfg.suite]
    return [item for s in names for item in BUILDERS[s](cfg)]


def run_suite(cfg: SuiteConfig, progress: Callable[[CheckResult], None] | None = None) -> VerificationReport:
    cfg.validate()
    report = VerificationReport(cfg.suite, cfg.echo())
    for name, fn in suite_checks(cfg):
        result = run_check(cfg, name, fn)
        report.checks.append(result)
        if progress is not None:
            progress(result)
    return report
