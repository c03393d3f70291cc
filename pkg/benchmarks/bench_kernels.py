"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 2000]

Prints one row per kernel and ambient dimension with the best time of each
backend and the speedup.  The compiled backend must have been built
(``pip install -e . --no-build-isolation``).
"""
import argparse
import timeit

import numpy as np

from reebverify.kernels import _pykernels
from reebverify.quaternionic import build_quaternionic_triple

try:
    from reebverify.kernels import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None


def cases(points: int, rng):
    for m in (1, 2, 3):
        T = build_quaternionic_triple(m)
        d = T.dim
        P = rng.normal(size=(points, d))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        A = np.ascontiguousarray(T.K)
        B = np.zeros_like(P)
        Z, _ = _pykernels.contact_frames(A, P)
        M = np.ascontiguousarray(2.0 * np.einsum("nia,ij,njb->nab", Z, A, Z))
        yield d, "householder_complement", lambda k: k.householder_complement(P)
        yield d, "contact_frames", lambda k: k.contact_frames(A, P)
        yield d, "solve_contact", lambda k: k.solve_contact(A, P, 1.0, B)
        yield d, "pfaffian", lambda k: k.pfaffian(M)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--points", type=int, default=2000)
    args = ap.parse_args(argv)
    if _ckernels is None:
        raise SystemExit("compiled kernels are not built")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<24}{'dim':>4}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for d, name, call in cases(args.points, rng):
        py = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat))
        print(f"{name:<24}{d:>4}{py * 1e3:>12.3f}{cy * 1e3:>12.3f}{py / cy:>10.1f}")


if __name__ == "__main__":
    main()
