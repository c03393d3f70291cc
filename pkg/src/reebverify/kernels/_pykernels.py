"""Pure numpy implementation of the batched linear-algebra kernels.

Every function takes stacked inputs (leading batch axis ``N``) and mirrors
the compiled module ``_ckernels`` exactly in signature and semantics.
"""
import numpy as np

BACKEND = "python"


def householder_complement(X):
    """Orthonormal basis of the orthogonal complement of each row of ``X``.

    Uses the reflection ``H = I - 2 u u^T / u^T u`` with
    ``u = x/|x| + s e_0`` and ``s = sign(x_0)`` (``sign(0) = +1``); columns
    ``1..k-1`` of ``H`` are returned, shape ``(N, k, k-1)``.
    """
    X = np.ascontiguousarray(X, dtype=float)
    N, k = X.shape
    xh = X / np.linalg.norm(X, axis=1, keepdims=True)
    s = np.where(xh[:, 0] >= 0.0, 1.0, -1.0)
    u = xh.copy()
    u[:, 0] += s
    uu = np.einsum("ni,ni->n", u, u)
    H = np.broadcast_to(np.eye(k), (N, k, k)) - 2.0 * u[:, :, None] * u[:, None, :] / uu[:, None, None]
    return np.ascontiguousarray(H[:, :, 1:])


def _broadcast_A(A, N):
    A = np.asarray(A, dtype=float)
    if A.ndim == 2:
        A = A[None]
    if A.shape[0] == 1 and N != 1:
        A = np.broadcast_to(A, (N,) + A.shape[1:])
    return A


def contact_frames(A, P):
    """Orthonormal frames of ``ker(p^T A .) ∩ p^⊥`` for each row ``p`` of ``P``.

    Returns ``(Z, wnorm)`` with ``Z`` of shape ``(N, d, d-2)`` and ``wnorm``
    the norm of the tangential part of the covector ``A^T p``.  Where
    ``wnorm`` vanishes the frame is arbitrary.
    """
    P = np.ascontiguousarray(P, dtype=float)
    N, d = P.shape
    A = _broadcast_A(A, N)
    F = householder_complement(P)
    w = np.einsum("nji,nj->ni", A, P)
    wh = np.einsum("nij,ni->nj", F, w)
    wnorm = np.linalg.norm(wh, axis=1)
    safe = np.where(wnorm[:, None] > 0.0, wh, np.eye(d - 1)[0])
    Zh = householder_complement(safe)
    return np.einsum("nij,njk->nik", F, Zh), wnorm


def solve_contact(A, P, a, B):
    """Solve for tangent ``v`` with ``p^T A v = a`` and ``2 v^T A z = B.z`` on ξ.

    ``z`` ranges over an orthonormal frame of ``ξ_p = ker(p^T A .) ∩ p^⊥``.
    Returns ``(V, det)``; ``det`` is the determinant of the reduced
    ``(d-1) x (d-1)`` system (zero when the configuration is not contact).
    """
    P = np.ascontiguousarray(P, dtype=float)
    N, d = P.shape
    A = _broadcast_A(A, N)
    a = np.broadcast_to(np.asarray(a, dtype=float), (N,))
    B = np.broadcast_to(np.asarray(B, dtype=float), (N, d))
    F = householder_complement(P)
    w = np.einsum("nji,nj->ni", A, P)
    wh = np.einsum("nij,ni->nj", F, w)
    wnorm = np.linalg.norm(wh, axis=1)
    safe = np.where(wnorm[:, None] > 0.0, wh, np.eye(d - 1)[0])
    Z = np.einsum("nij,njk->nik", F, householder_complement(safe))
    AZ = np.einsum("nij,njk->nik", A, Z)
    S = np.empty((N, d - 1, d - 1))
    S[:, 0, :] = wh
    S[:, 1:, :] = 2.0 * np.einsum("nij,nik->nkj", F, AZ)
    rhs = np.empty((N, d - 1))
    rhs[:, 0] = a
    rhs[:, 1:] = np.einsum("ni,nik->nk", B, Z)
    det = np.linalg.det(S)
    ok = np.abs(det) > 0.0
    c = np.zeros((N, d - 1))
    if ok.any():
        c[ok] = np.linalg.solve(S[ok], rhs[ok][..., None])[..., 0]
    V = np.einsum("nij,nj->ni", F, c)
    return V, det


def _pfaffian_one(M):
    A = np.array(M, dtype=float)
    n = A.shape[0]
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            pf = -pf
        if A[k + 1, k] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            A[k + 2:, k + 2:] += np.outer(tau, A[k + 2:, k + 1]) - np.outer(A[k + 2:, k + 1], tau)
    return pf


def pfaffian(M):
    """Pfaffians of a stack of skew-symmetric matrices, shape ``(N, n, n)``."""
    M = np.asarray(M, dtype=float)
    return np.array([_pfaffian_one(m) for m in M])
