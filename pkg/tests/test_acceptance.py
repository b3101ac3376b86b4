"""Acceptance criteria, one test per criterion, each printing PASS/FAIL.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
The experiment criteria (6, 7) run the full 1000-trial zoo sweep twice and
dominate the runtime (a few minutes with the numba backend).
"""

import time
from importlib import resources

import numpy as np
import pytest

import hypertv as hv
from hypertv.experiment import format_sweep_table
from hypertv.verify import (
    random_hypergraph,
    reference_hypergraph,
    reference_tv_closed_form,
)


def report(passed: bool, label: str, detail: str):
    print(f"\n{'PASS' if passed else 'FAIL'} {label}: {detail}")
    assert passed, f"{label}: {detail}"


@pytest.fixture(scope="module")
def zoo_sweep_config(zoo):
    _, schema = zoo
    return hv.ExperimentConfig(
        schema=schema,
        n_vertices=30,
        fractions=(0.4, 0.5, 0.6, 0.7),
        n_trials=1000,
        rng_seed=2026,
        solver=hv.SolverConfig(lam=0.001, record_trace=False),
    )


@pytest.fixture(scope="module")
def zoo_sweep(zoo, zoo_sweep_config):
    ds, _ = zoo
    start = time.perf_counter()
    rows = hv.run_sweep(zoo_sweep_config, ds)
    elapsed = time.perf_counter() - start
    return rows, elapsed


def test_criterion_1_polynomial_identity(demo7_model):
    """TV on the demo hypergraph equals its hand-expanded polynomial."""
    assert demo7_model.pretreated.hypergraph == reference_hypergraph_pretreated()
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        f = rng.standard_normal(7)
        value = hv.tv_total(demo7_model.operators, demo7_model.transform, f)
        worst = max(worst, abs(value - reference_tv_closed_form(f)))
    elapsed = time.perf_counter() - start
    report(
        worst < 1e-10 and elapsed < 1.0,
        "criterion 1 (polynomial identity)",
        f"worst residual {worst:.3e} over 20 signals (tol 1e-10), {elapsed:.3f}s (< 1s)",
    )


def reference_hypergraph_pretreated():
    return hv.pretreat(reference_hypergraph()).hypergraph


def test_criterion_2_positive_semidefiniteness():
    """Even-order contractions stay above -1e-9 over heavy random sampling."""
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = np.inf
    n_graphs = 0
    while n_graphs < 100:
        n = int(rng.integers(4, 21))
        h = random_hypergraph(rng, n, int(rng.integers(1, 9)), (2, 4, 6))
        n_graphs += 1
        for partial in hv.decompose(h):
            ok, value = hv.check_psd(partial, n_samples=1000,
                                     rng_seed=int(rng.integers(2**32)))
            worst = min(worst, value)
            assert ok, f"PSD violation {value} at c={partial.cardinality}"
    elapsed = time.perf_counter() - start
    report(
        worst >= -1e-9 and elapsed < 30.0,
        "criterion 2 (positive semidefiniteness)",
        f"min TV {worst:.3e} over 100 hypergraphs x 1000 signals "
        f"(tol -1e-9), {elapsed:.1f}s (< 30s)",
    )


def test_criterion_3_oracle_equivalence():
    """Implicit TV and contraction match dense n-mode products, D <= 8."""
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 9))
        h = random_hypergraph(rng, n, int(rng.integers(1, 6)), (2, 4, 6))
        f = rng.standard_normal(n)
        for partial in hv.decompose(h):
            op = hv.LaplacianOperator(partial)
            tensor = hv.build_dense_laplacian(partial)
            worst = max(worst, abs(
                hv.tv_partial(op, f) - hv.nmode_contract_full(tensor, f)
            ))
            worst = max(worst, float(np.max(np.abs(
                hv.contract(op, f) - hv.nmode_contract_vector(tensor, f)
            ))))
    # gradient route through the transform against the dense contraction
    for _ in range(20):
        n = int(rng.integers(3, 8))
        h = random_hypergraph(rng, n, int(rng.integers(1, 5)), (2, 3, 4, 5))
        pre = hv.pretreat(h)
        ops = [hv.LaplacianOperator(p) for p in hv.decompose(pre.hypergraph)]
        f = rng.standard_normal(n)
        ft = hv.apply_transform(pre.transform, f)
        dense_grad = np.zeros(n)
        for partial in hv.decompose(pre.hypergraph):
            tensor = hv.build_dense_laplacian(partial)
            dense_grad += partial.cardinality * hv.transpose_apply(
                pre.transform, hv.nmode_contract_vector(tensor, ft)
            )
        grad = hv.tv_gradient(ops, pre.transform, f)
        worst = max(worst, float(np.max(np.abs(grad - dense_grad))))
    elapsed = time.perf_counter() - start
    report(
        worst < 1e-10 and elapsed < 30.0,
        "criterion 3 (oracle equivalence)",
        f"worst residual {worst:.3e} vs dense contraction (tol 1e-10), "
        f"{elapsed:.1f}s (< 30s)",
    )


def test_criterion_4_gradient_correctness():
    """Analytic TV gradient vs central finite differences, pretreated included."""
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    pretreated_seen = 0
    for _ in range(50):
        n = int(rng.integers(4, 11))
        h = random_hypergraph(rng, n, int(rng.integers(1, 7)), (2, 3, 4, 5))
        pre = hv.pretreat(h)
        pretreated_seen += pre.n_aux > 0
        ops = [hv.LaplacianOperator(p) for p in hv.decompose(pre.hypergraph)]
        f = rng.uniform(-1.0, 1.0, size=n)
        analytic = hv.tv_gradient(ops, pre.transform, f)
        step = 1e-5
        numeric = np.empty(n)
        for i in range(n):
            bumped = f.copy()
            bumped[i] = f[i] + step
            upper = hv.tv_total(ops, pre.transform, bumped)
            bumped[i] = f[i] - step
            lower = hv.tv_total(ops, pre.transform, bumped)
            numeric[i] = (upper - lower) / (2 * step)
        scale = max(float(np.max(np.abs(numeric))), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    elapsed = time.perf_counter() - start
    report(
        worst < 1e-6 and elapsed < 30.0 and pretreated_seen > 10,
        "criterion 4 (gradient correctness)",
        f"worst relative error {worst:.3e} on 50 instances "
        f"({pretreated_seen} pretreated), tol 1e-6, {elapsed:.1f}s (< 30s)",
    )


def test_criterion_5_transformation_matrix(demo7):
    """Pretreating the demo hypergraph yields the exact mean-weight row."""
    pre = hv.pretreat(demo7)
    row = pre.transform.dense()[7]
    expected = np.array([1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0]) / 3.0
    exact = np.array_equal(row, expected) and pre.n_aux == 1
    report(
        exact,
        "criterion 5 (transformation matrix)",
        f"auxiliary row {row.tolist()} == [1/3, 1/3, 0, 0, 1/3, 0, 0] exactly",
    )


def test_criterion_6_experiment_properties(zoo, zoo_sweep):
    """Zoo sweep beats the majority class, is monotone, and beats the baseline."""
    ds, schema = zoo
    rows, elapsed = zoo_sweep
    signal = ds.column(schema.signal_feature)
    positive_rate = sum(v == schema.positive_value for v in signal) / len(signal)
    majority = max(positive_rate, 1.0 - positive_rate)

    above_majority = all(r.mean_accuracy > majority for r in rows)

    monotone = True
    for left, right in zip(rows, rows[1:]):
        se = np.hypot(left.std_accuracy, right.std_accuracy) / np.sqrt(left.n_trials)
        if right.mean_accuracy < left.mean_accuracy - se:
            monotone = False

    beats_baseline = all(r.mean_accuracy >= r.baseline_mean for r in rows)

    summary = "; ".join(
        f"{r.fraction:g}: {r.mean_accuracy:.4f} vs LP {r.baseline_mean:.4f}"
        for r in rows
    )
    report(
        above_majority and monotone and beats_baseline and elapsed < 600.0,
        "criterion 6 (zoo experiment)",
        f"majority {majority:.4f}; {summary}; sweep {elapsed:.0f}s (< 600s)",
    )


def test_criterion_7_determinism(zoo, zoo_sweep, zoo_sweep_config):
    """Re-running the full sweep with the same seed gives identical bytes."""
    ds, _ = zoo
    rows_first, _ = zoo_sweep
    rows_second = hv.run_sweep(zoo_sweep_config, ds)
    table_first = format_sweep_table(rows_first).encode()
    table_second = format_sweep_table(rows_second).encode()
    report(
        table_first == table_second,
        "criterion 7 (determinism)",
        f"two 1000-trial sweeps produced byte-identical tables "
        f"({len(table_first)} bytes)",
    )


def test_criterion_8_odd_order_counter_example():
    """Odd orders can go negative (dense-oracle search); solver rejects them."""
    partial = hv.UniformPartial(cardinality=3, hyperedges=((0, 1, 2),), dimension=3)
    tensor = hv.build_dense_laplacian(partial)
    rng = np.random.default_rng(8)
    most_negative = min(
        hv.nmode_contract_full(tensor, rng.standard_normal(3)) for _ in range(500)
    )
    rejected = False
    try:
        hv.tv_partial(hv.LaplacianOperator(partial), np.ones(3))
    except hv.ValidationError:
        rejected = True
    report(
        most_negative < -1e-3 and rejected,
        "criterion 8 (odd-order counter-example)",
        f"random search found contraction {most_negative:.3e} < 0; "
        f"operator path rejects odd orders",
    )
