"""Timing of the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row is the best wall time over ``--repeat`` runs, after one warm-up
call so that compilation is not counted.
"""
import argparse
import time

import numpy as np

from syndeco import _kernels
from syndeco.ci import PolytopeKind, build_polytope
from syndeco.core import ChannelSpace, compose_joint
from syndeco.corpus import random_channel
from syndeco.hierarchy import constraint_set, pack
from syndeco.projection import generator_layout


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def ipf_case(kern, space, order):
    p, k = random_channel(space, 0)
    groups, targets, offsets = pack(space, constraint_set(p, k, order).constraints)
    q0 = np.repeat(p.table / space.output_cardinality, space.output_cardinality)

    def run():
        kern.ipf_run(q0.copy(), groups, targets, offsets, 1e-10, 100_000)

    return run


def expfam_case(kern, space):
    p, k = random_channel(space, 1)
    layout, n_params = generator_layout(space, 1)
    pk = (p.table[:, None] * k.rows).ravel()
    px = np.ascontiguousarray(p.table)

    def run():
        kern.expfam_cd(np.zeros(n_params), layout, pk, px, space.input_size, space.output_cardinality,
                       4.0, 1e-9, 1e-15, 20_000)

    return run


def nullspace_case(kern, space):
    p, k = random_channel(space, 2)
    poly = build_polytope(compose_joint(p, k), PolytopeKind.WEDGE)
    n1, n2, ny = poly.shape

    def run():
        kern.nullspace_cd(poly.reference.copy(), poly.null_space_basis, n1 * n2, ny, 1e-13, 1e-12, 10_000,
                          np.empty(10_000))

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels.NUMBA_KERNELS is None:
        raise SystemExit("numba is not installed; nothing to compare")
    cases = [
        ("ipf 2x2 -> 2, order 1", lambda kern: ipf_case(kern, ChannelSpace((2, 2), 2), 1)),
        ("ipf 3x3x3 -> 3, order 2", lambda kern: ipf_case(kern, ChannelSpace((3, 3, 3), 3), 2)),
        ("ipf 2^6 -> 2, order 3", lambda kern: ipf_case(kern, ChannelSpace((2,) * 6, 2), 3)),
        ("brute force 2x2x2 -> 2, order 1", lambda kern: expfam_case(kern, ChannelSpace((2, 2, 2), 2))),
        ("wedge descent 3x3 -> 3", lambda kern: nullspace_case(kern, ChannelSpace((3, 3), 3))),
    ]
    print(f"{'case':<34}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}")
    for name, make in cases:
        t_np = best_of(make(_kernels.NUMPY_KERNELS), args.repeat)
        t_nb = best_of(make(_kernels.NUMBA_KERNELS), args.repeat)
        print(f"{name:<34}{t_np:>12.4g}{t_nb:>12.4g}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
