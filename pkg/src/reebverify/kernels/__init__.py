"""Batched linear-algebra kernels behind every pointwise solve.

The compiled extension ``_ckernels`` is used when it has been built; the numpy
module ``_pykernels`` is the fallback.  Setting ``REEBVERIFY_PURE_PYTHON=1``
forces the fallback.

Kernels
-------
householder_complement
    Orthonormal complement frames of stacked vectors.
contact_frames
    Frames of the contact planes ``ker(p^T A .) ∩ p^⊥``.
solve_contact
    The reduced linear system shared by Reeb fields, contact Hamiltonian
    fields and horizontal lifts.
pfaffian
    Pfaffians by skew-symmetric Parlett-Reid elimination.
"""
import os

from . import _pykernels

if os.environ.get("REEBVERIFY_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.BACKEND
householder_complement = _impl.householder_complement
contact_frames = _impl.contact_frames
solve_contact = _impl.solve_contact
pfaffian = _impl.pfaffian

__all__ = [
    "BACKEND",
    "householder_complement",
    "contact_frames",
    "solve_contact",
    "pfaffian",
]
