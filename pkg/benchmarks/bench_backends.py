"""Benchmark the numba kernels against the pure-numpy fallback.

Times the two hot paths on a zoo-sized workload: per-partial total-variation
value/gradient kernels, and the full recovery loop. Run after installing the
package:

    python benchmarks/bench_backends.py

Pick a backend globally with HYPERTV_BACKEND=numpy|numba|auto; this script
measures both regardless (numba first, so compilation happens before timing).
"""

import time

import numpy as np

import hypertv as hv
from hypertv import _kernels


def build_workload(seed=0, n=30, n_edges=28):
    rng = np.random.default_rng(seed)
    edges = []
    for _ in range(n_edges):
        c = int(rng.choice([2, 3, 4, 6, 8, 12, 18, 24]))
        edges.append(tuple(int(v) for v in rng.choice(n, size=c, replace=False)))
    h = hv.Hypergraph(n, tuple(edges))
    model = hv.TvModel.from_hypergraph(h)
    f = rng.uniform(0.05, 0.95, size=n)
    observed = np.sort(rng.choice(n, size=15, replace=False))
    obs = hv.Observation(tuple(int(i) for i in observed), f[observed])
    return model, f, obs


def time_call(fn, repeats):
    fn()  # warmup / JIT
    start = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - start) / repeats


def bench_tv_kernels(model, f, repeats=2000):
    f_tilde = hv.apply_transform(model.transform, f)
    results = {}
    for name in hv.available_backends():
        kernels = _kernels.get_kernels(name)

        def value_all():
            total = 0.0
            for op in model.operators:
                total += kernels.tv_value(op.members, f_tilde)
            return total

        out = np.zeros(model.transform.n_extended)

        def grad_all():
            out[:] = 0.0
            for op in model.operators:
                kernels.tv_contract_add(op.members, f_tilde, out,
                                        float(op.cardinality))

        results[name] = (
            time_call(value_all, repeats),
            time_call(grad_all, repeats),
        )
    return results


def bench_recover(model, obs, repeats=5):
    cfg = hv.SolverConfig(lam=0.001, step_size=0.1, max_iters=2000,
                          record_trace=False)
    results = {}
    for name in hv.available_backends():
        previous = hv.set_backend(name)
        try:
            results[name] = time_call(lambda: hv.recover(cfg, obs, model), repeats)
        finally:
            hv.set_backend(previous)
    return results


def main():
    model, f, obs = build_workload()
    edge_sizes = [len(e) for e in model.pretreated.hypergraph.hyperedges]
    print(f"workload: {model.n_vertices} vertices, {len(edge_sizes)} hyperedges, "
          f"cardinalities {min(edge_sizes)}..{max(edge_sizes)}, "
          f"{model.pretreated.n_aux} auxiliary vertices")
    print(f"available backends: {', '.join(hv.available_backends())}\n")

    tv_results = bench_tv_kernels(model, f)
    print(f"{'kernel':<22} " + "".join(f"{name:>12} " for name in tv_results))
    for i, label in enumerate(("tv value", "tv gradient")):
        row = f"{label:<22} "
        for name in tv_results:
            row += f"{tv_results[name][i] * 1e6:>10.1f}us "
        print(row)

    rec_results = bench_recover(model, obs)
    row = f"{'recover (2000 iters)':<22} "
    for name in rec_results:
        row += f"{rec_results[name] * 1e3:>10.1f}ms "
    print(row)

    if "numba" in rec_results and "numpy" in rec_results:
        speedup = rec_results["numpy"] / rec_results["numba"]
        print(f"\nnumba speedup on recover: {speedup:.1f}x")


if __name__ == "__main__":
    main()
