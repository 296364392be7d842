"""Time the compiled and numpy Viterbi kernels on a 64-state packet batch.

Usage: python benchmarks/bench_kernels.py [--packets 64] [--sections 1540] [--repeat 3]
"""

import argparse
import time

import numpy as np

from bicmb import kernels
from bicmb.sim import label_metrics, output_labels, predecessors
from bicmb.trellis import CodeSpec, build_encoder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--generators", default="133,171")
    ap.add_argument("--packets", type=int, default=64)
    ap.add_argument("--sections", type=int, default=1540)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    tr = build_encoder(CodeSpec.from_octal(args.generators))
    rng = np.random.default_rng(0)
    metrics = rng.random((args.packets, args.sections * tr.n_c, 2))
    lm = np.ascontiguousarray(label_metrics(metrics, tr, None, args.sections))
    ps, pu = predecessors(tr)
    labels = output_labels(tr)
    init = np.full((args.packets, tr.num_states), np.inf)
    init[:, 0] = 0.0

    results = {}
    for name in ("cython", "python"):
        try:
            acs, tb = kernels.get_kernels(name)
        except ImportError:
            print(f"{name:>7}: not available")
            continue
        best = np.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            dec, final = acs(lm, labels, ps, pu, init)
            bits = tb(np.asarray(dec), ps, pu, np.zeros(args.packets, dtype=np.int64))
            best = min(best, time.perf_counter() - t0)
        results[name] = np.asarray(bits)
        print(f"{name:>7}: {best * 1e3:8.1f} ms per batch, {best / args.packets * 1e3:.3f} ms per packet")
    if len(results) == 2:
        same = np.array_equal(results["cython"], results["python"])
        print(f"outputs identical: {same}")


if __name__ == "__main__":
    main()
