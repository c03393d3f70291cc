"""Fixed-step RK4 on the unit sphere with per-step renormalization."""
from __future__ import annotations

import math

import numpy as np


def normalize(P):
    P = np.asarray(P, dtype=float)
    return P / np.linalg.norm(P, axis=-1, keepdims=True)


def n_steps(span: float, step: float) -> int:
    if not step > 0:
        raise ValueError(f"step must be positive, got {step!r}")
    return max(1, math.ceil(abs(span) / step - 1e-9))


def rk4_sphere(field, p0, t0: float, t1: float, step: float, callback=None):
    """Integrate ``dp/dt = field(p, t)`` from ``t0`` to ``t1``.

    ``p0`` is ``(d,)`` or a batch ``(N, d)``; ``field`` must accept the
    same shape.  The step is shrunk so that a whole number of steps lands
    exactly on ``t1``.  Returns ``(p, steps)``.  ``callback(t, p, k1)`` is
    called before each step with the stage-one velocity.
    """
    steps = n_steps(t1 - t0, step)
    h = (t1 - t0) / steps
    p = normalize(p0)
    for i in range(steps):
        t = t0 + i * h
        k1 = field(p, t)
        if callback is not None:
            callback(t, p, k1)
        k2 = field(normalize(p + 0.5 * h * k1), t + 0.5 * h)
        k3 = field(normalize(p + 0.5 * h * k2), t + 0.5 * h)
        k4 = field(normalize(p + h * k3), t + h)
        p = normalize(p + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    return p, steps
