"""Hypothesis strategies and sampling helpers shared by the tests."""
import numpy as np
from hypothesis import strategies as st

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)
polar = st.floats(1e-3, np.pi - 1e-3, allow_nan=False)
seeds = st.integers(0, 2**32 - 1)


@st.composite
def unit_vectors(draw, dim):
    seed = draw(seeds)
    v = np.random.default_rng(seed).normal(size=dim)
    return v / np.linalg.norm(v)


@st.composite
def directions(draw):
    theta, phi = draw(angles), draw(st.floats(0.0, np.pi))
    return np.array([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)])


def unit_rows(rng, count, d):
    X = rng.normal(size=(count, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def tangent_rows(rng, P):
    W = rng.normal(size=P.shape)
    W = W - np.einsum("ni,ni->n", W, P)[:, None] * P
    return W / np.linalg.norm(W, axis=1, keepdims=True)
