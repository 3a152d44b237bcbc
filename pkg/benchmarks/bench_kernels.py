"""Compare the compiled and numpy transport kernels.

Usage::

    python benchmarks/bench_kernels.py [--n 64] [--degree 2] [--repeat 5]

Times one full Vlasov residual evaluation per backend on a Landau mesh
and checks that both backends agree.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from vmsiac import _kernels_py, kernels
from vmsiac.cases import RunConfig
from vmsiac.experiments import initial_state
from vmsiac.kinetic import VlasovOperator

try:
    from vmsiac import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def residual_with(backend, op: VlasovOperator, state):
    saved = kernels.axis_rhs
    kernels.axis_rhs = backend.axis_rhs
    try:
        return op.residual(state.f.coeffs[0], state.fields.coeffs, state.kind)
    finally:
        kernels.axis_rhs = saved


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("--case", default="landau", choices=("landau", "two_stream", "weibel"))
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)

    state = initial_state(RunConfig.for_case(args.case, nx=args.n, nv=args.n, k=args.degree))
    op = VlasovOperator(state.f.mesh, state.f.basis)
    backends = {"python": _kernels_py}
    if _ckernels is not None:
        backends["cython"] = _ckernels
    results = {}
    print(f"{args.case} mesh {state.f.mesh.describe()} k={args.degree}")
    for name, mod in backends.items():
        results[name] = residual_with(mod, op, state)
        t = min(timeit.repeat(lambda: residual_with(mod, op, state), number=1, repeat=args.repeat))
        print(f"  {name:7s} {1e3 * t:9.2f} ms per residual")
    if len(results) == 2:
        diff = np.max(np.abs(results["python"] - results["cython"]))
        print(f"  max |python - cython| = {diff:.2e}")


if __name__ == "__main__":
    main()
