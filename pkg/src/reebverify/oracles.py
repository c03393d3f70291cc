"""Independent reference computations used to cross-check the main routines.

Nothing here calls into the kernels or the closed forms it is meant to
check: power series instead of closed-form exponentials, perfect-matching
expansion instead of elimination, finite differences instead of the
hard-coded exterior derivative, QR frames plus least squares instead of
Householder frames plus the reduced solve.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def series_exp(F, t: float, terms: int = 20, max_arg: float = 0.5) -> np.ndarray:
    """``exp(tF)`` by a truncated Taylor series with scaling and squaring.

    The argument is halved until ``|t| * ||F||_2 <= max_arg``, the series is
    summed to ``terms`` terms, and the result squared back up.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    norm = abs(t) * np.linalg.norm(F, 2)
    squarings = max(0, math.ceil(math.log2(norm / max_arg))) if norm > max_arg else 0
    X = (t / 2.0**squarings) * F
    out = np.eye(n)
    term = np.eye(n)
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def _perfect_matchings(idx):
    if not idx:
        yield []
        return
    first, rest = idx[0], idx[1:]
    for pos, partner in enumerate(rest):
        remaining = rest[:pos] + rest[pos + 1:]
        for tail in _perfect_matchings(remaining):
            yield [(first, partner)] + tail


def _matching_sign(pairs) -> int:
    perm = [x for pair in pairs for x in pair]
    sign = 1
    for i, j in itertools.combinations(range(len(perm)), 2):
        if perm[i] > perm[j]:
            sign = -sign
    return sign


def pfaffian_by_matchings(M) -> float:
    """Pfaffian as the signed sum over perfect matchings (size <= 10)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    if n % 2:
        return 0.0
    if n > 10:
        raise ValueError("matching expansion limited to n <= 10")
    total = 0.0
    for pairs in _perfect_matchings(list(range(n))):
        prod = 1.0
        for a, b in pairs:
            prod *= M[a, b]
        total += _matching_sign(pairs) * prod
    return total


def _project(x):
    return x / np.linalg.norm(x)


def exterior_derivative_fd(A, p, u, v, h: float = 2e-4) -> float:
    """``d alpha(u, v)`` for ``alpha = x^T A dx`` restricted to the unit sphere.

    Uses the surface patch ``sigma(s, t) = (p + s u + t v)/|...|`` and
    ``d alpha(d_s, d_t) = d_s[alpha(d_t sigma)] - d_t[alpha(d_s sigma)]``,
    every derivative by central differences.
    """
    A = np.asarray(A, dtype=float)
    p, u, v = (np.asarray(x, dtype=float) for x in (p, u, v))

    def sigma(s, t):
        return _project(p + s * u + t * v)

    def alpha_t(s, t):
        tangent = (sigma(s, t + h) - sigma(s, t - h)) / (2 * h)
        return sigma(s, t) @ A @ tangent

    def alpha_s(s, t):
        tangent = (sigma(s + h, t) - sigma(s - h, t)) / (2 * h)
        return sigma(s, t) @ A @ tangent

    ds = (alpha_t(h, 0.0) - alpha_t(-h, 0.0)) / (2 * h)
    dt = (alpha_s(0.0, h) - alpha_s(0.0, -h)) / (2 * h)
    return float(ds - dt)


def qr_tangent_frame(p) -> np.ndarray:
    """Orthonormal basis of ``p^⊥`` from a complete QR factorization."""
    p = np.asarray(p, dtype=float)
    Q, _ = np.linalg.qr(p[:, None], mode="complete")
    return Q[:, 1:]


def reeb_by_lstsq(A, p) -> np.ndarray:
    """Reeb vector of ``alpha = x^T A dx`` at ``p`` by least squares.

    Unknown ``R`` in ambient coordinates; rows impose ``p.R = 0``,
    ``p^T A R = 1`` and ``R^T (A - A^T) t = 0`` for every vector ``t`` of a QR
    tangent frame (``d alpha(R, t)`` with ``d alpha(x, y) = x^T(A - A^T)y``).
    """
    A = np.asarray(A, dtype=float)
    p = np.asarray(p, dtype=float)
    T = qr_tangent_frame(p)
    rows = [p, A.T @ p]
    rhs = [0.0, 1.0]
    for t in T.T:
        rows.append((A - A.T) @ t)
        rhs.append(0.0)
    R, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return R


def unwrap_winding(values) -> float:
    """Turns of a closed complex curve from ``np.unwrap`` of its argument."""
    ang = np.unwrap(np.angle(np.asarray(values, dtype=complex)))
    return float((ang[-1] - ang[0]) / (2 * np.pi))


def total_exterior_derivative_fd(alpha, p, base, X1, X2, h: float = 1e-4) -> float:
    """``d alpha(X1, X2)`` on ``S^{d-1} x R^2`` by central differences.

    ``alpha(p, base, v, u)`` evaluates the form on the tangent vector
    ``(v, u)`` at ``(p, base)``; ``X1, X2`` are ``(v, u)`` pairs.  The patch is
    ``sigma(s, t) = (normalize(p + s v1 + t v2), base + s u1 + t u2)``.
    """
    p, base = np.asarray(p, dtype=float), np.asarray(base, dtype=float)
    (v1, u1), (v2, u2) = [(np.asarray(v, dtype=float), np.asarray(u, dtype=float)) for v, u in (X1, X2)]

    def sigma(s, t):
        return _project(p + s * v1 + t * v2), base + s * u1 + t * u2

    def along(s, t, ds, dt):
        q, b = sigma(s, t)
        qp, bp = sigma(s + h * ds, t + h * dt)
        qm, bm = sigma(s - h * ds, t - h * dt)
        return alpha(q, b, (qp - qm) / (2 * h), (bp - bm) / (2 * h))

    d_s = (along(h, 0.0, 0, 1) - along(-h, 0.0, 0, 1)) / (2 * h)
    d_t = (along(0.0, h, 1, 0) - along(0.0, -h, 1, 0)) / (2 * h)
    return float(d_s - d_t)
