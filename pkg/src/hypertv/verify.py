"""Executable correctness checks behind the `verify` CLI subcommand.

Four randomized checks, each reporting its worst observed value:

- ``polynomial``: total variation on a fixed 7-vertex mixed-cardinality
  hypergraph against its hand-expanded closed form.
- ``psd``: sampled nonnegativity of even-order contractions, plus rejection
  of odd orders by the operator path.
- ``gradient``: analytic total-variation gradient against central finite
  differences, on hypergraphs with and without auxiliary vertices.
- ``oracle``: implicit per-hyperedge evaluation against dense n-mode-product
  contraction of explicitly built Laplacian tensors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import build_dense_laplacian, nmode_contract_full, nmode_contract_vector
from .errors import ValidationError
from .hypergraph import Hypergraph, apply_transform, decompose, pretreat
from .laplacian import (
    PSD_TOLERANCE,
    LaplacianOperator,
    check_psd,
    contract,
    tv_gradient,
    tv_partial,
    tv_total,
)

SCOPES = ("polynomial", "psd", "gradient", "oracle")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail} (worst {self.worst:.3e})"


def reference_hypergraph() -> Hypergraph:
    """7-vertex demo hypergraph: one 3-edge, one 4-edge, two 2-edges."""
    return Hypergraph(7, ((0, 1, 4), (1, 2, 3, 4), (2, 5), (5, 6)))


def reference_tv_closed_form(f) -> float:
    """Hand-expanded total variation of :func:`reference_hypergraph`.

    After pretreatment the 3-edge {0,1,4} gains an auxiliary vertex carrying
    the mean m = (f0+f1+f4)/3, so the order-4 part is
    f0^4+f1^4+f4^4+m^4-4*f0*f1*f4*m plus f1^4+f2^4+f3^4+f4^4-4*f1*f2*f3*f4,
    and the order-2 part is (f2-f5)^2+(f5-f6)^2.
    """
    f = np.asarray(f, dtype=np.float64)
    m = (f[0] + f[1] + f[4]) / 3.0
    quartic = (
        f[0] ** 4 + f[1] ** 4 + f[4] ** 4 + m**4 - 4.0 * f[0] * f[1] * f[4] * m
    ) + (
        f[1] ** 4 + f[2] ** 4 + f[3] ** 4 + f[4] ** 4
        - 4.0 * f[1] * f[2] * f[3] * f[4]
    )
    quadratic = (f[2] - f[5]) ** 2 + (f[5] - f[6]) ** 2
    return float(quadratic + quartic)


def random_hypergraph(rng, n_vertices: int, n_edges: int, cardinalities) -> Hypergraph:
    """Draw hyperedges uniformly: one cardinality choice, then distinct vertices."""
    cards = [c for c in cardinalities if c <= n_vertices]
    if not cards:
        raise ValidationError("no cardinality fits the vertex count")
    edges = []
    for _ in range(n_edges):
        c = int(rng.choice(cards))
        edges.append(tuple(int(v) for v in rng.choice(n_vertices, size=c, replace=False)))
    return Hypergraph(n_vertices, tuple(edges))


def _model_parts(h: Hypergraph):
    pre = pretreat(h)
    ops = tuple(LaplacianOperator(p) for p in decompose(pre.hypergraph))
    return ops, pre.transform


def check_polynomial(n_signals: int = 20, seed: int = 0, tol: float = 1e-10) -> CheckResult:
    """Implementation TV vs the hand-expanded polynomial, random signals."""
    h = reference_hypergraph()
    ops, tm = _model_parts(h)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_signals):
        f = rng.standard_normal(h.n_vertices)
        residual = abs(tv_total(ops, tm, f) - reference_tv_closed_form(f))
        worst = max(worst, residual)
    return CheckResult(
        name="polynomial",
        passed=worst < tol,
        worst=worst,
        detail=f"closed-form residual over {n_signals} signals, tol {tol:g}",
    )


def check_psd_sampling(n_graphs: int = 20, n_signals: int = 200, seed: int = 0) -> CheckResult:
    """Sampled nonnegativity for even orders; odd orders must be rejected."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(n_graphs):
        n = int(rng.integers(4, 21))
        h = random_hypergraph(rng, n, int(rng.integers(1, 9)), (2, 4, 6))
        for partial in decompose(h):
            ok, value = check_psd(partial, n_signals, rng_seed=int(rng.integers(2**32)))
            worst = min(worst, value)
            if not ok:
                return CheckResult("psd", False, value,
                                   "even-order contraction went negative")
    odd = decompose(random_hypergraph(rng, 6, 3, (3,)))[0]
    try:
        check_psd(odd, 1, rng_seed=0)
    except ValidationError:
        pass
    else:
        return CheckResult("psd", False, worst, "odd order was not rejected")
    return CheckResult(
        name="psd",
        passed=worst >= PSD_TOLERANCE,
        worst=float(worst),
        detail=f"min contraction over {n_graphs} hypergraphs x {n_signals} signals, "
               f"tol {PSD_TOLERANCE:g}; odd orders rejected",
    )


def _fd_gradient(ops, tm, f, step: float = 1e-5) -> np.ndarray:
    out = np.empty(f.shape[0])
    for i in range(f.shape[0]):
        bumped = f.copy()
        bumped[i] = f[i] + step
        upper = tv_total(ops, tm, bumped)
        bumped[i] = f[i] - step
        lower = tv_total(ops, tm, bumped)
        out[i] = (upper - lower) / (2.0 * step)
    return out


def check_gradient(n_instances: int = 20, seed: int = 0, tol: float = 1e-6) -> CheckResult:
    """Analytic TV gradient vs central finite differences."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(4, 11))
        h = random_hypergraph(rng, n, int(rng.integers(1, 7)), (2, 3, 4, 5))
        ops, tm = _model_parts(h)
        f = rng.uniform(-1.0, 1.0, size=n)
        analytic = tv_gradient(ops, tm, f)
        numeric = _fd_gradient(ops, tm, f)
        scale = max(float(np.max(np.abs(numeric))), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return CheckResult(
        name="gradient",
        passed=worst < tol,
        worst=worst,
        detail=f"relative error vs finite differences on {n_instances} instances, "
               f"tol {tol:g}",
    )


def check_oracle(n_instances: int = 20, seed: int = 0, tol: float = 1e-10) -> CheckResult:
    """Per-hyperedge evaluation vs dense n-mode contraction, value and vector."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(3, 9))
        h = random_hypergraph(rng, n, int(rng.integers(1, 6)), (2, 4, 6))
        f = rng.standard_normal(n)
        for partial in decompose(h):
            op = LaplacianOperator(partial)
            tensor = build_dense_laplacian(partial)
            worst = max(worst, abs(tv_partial(op, f) - nmode_contract_full(tensor, f)))
            worst = max(worst, float(np.max(np.abs(
                contract(op, f) - nmode_contract_vector(tensor, f)
            ))))
    return CheckResult(
        name="oracle",
        passed=worst < tol,
        worst=worst,
        detail=f"dense-contraction residual on {n_instances} instances, tol {tol:g}",
    )


def run_checks(scope: str = "all", seed: int = 0) -> list[CheckResult]:
    """Run one named check or all of them."""
    if scope not in SCOPES + ("all",):
        raise ValidationError(f"unknown scope {scope!r}; choose from {('all',) + SCOPES}")
    runners = {
        "polynomial": lambda: check_polynomial(seed=seed),
        "psd": lambda: check_psd_sampling(seed=seed),
        "gradient": lambda: check_gradient(seed=seed),
        "oracle": lambda: check_oracle(seed=seed),
    }
    names = SCOPES if scope == "all" else (scope,)
    return [runners[name]() for name in names]
