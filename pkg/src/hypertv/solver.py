"""Laplacian-regularized signal recovery by fixed-step gradient descent.

The estimate minimizes ``loss(observations, f) + lam * TV(f)``. The loss is
either the Bernoulli cross entropy (signals in [0, 1], evaluation clamped away
from the log singularities) or squared error. Iterates are projected onto
[0, 1] after each step by default, which keeps the cross entropy finite.

With the numba backend the whole iteration loop runs inside one compiled
kernel; the numpy backend runs the same sequence of operations composed from
the semantic building blocks in :mod:`hypertv.laplacian`. Identical inputs
produce bit-identical traces within one backend.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from ._files import write_text_atomic
from ._kernels import get_kernels
from .errors import DivergenceError, ParseError, ValidationError
from .hypergraph import (
    Hypergraph,
    PretreatedHypergraph,
    _as_signal,
    decompose,
    pretreat,
)
from .laplacian import LaplacianOperator, tv_gradient, tv_total

LOSS_KINDS = ("cross_entropy", "squared_error")


@dataclass(frozen=True, eq=False)
class Observation:
    """Sampled vertex indices plus the observed values at those vertices."""

    sampled_indices: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        idx = tuple(int(i) for i in self.sampled_indices)
        if any(i < 0 for i in idx):
            raise ValidationError("sampled indices must be nonnegative")
        if len(set(idx)) != len(idx):
            raise ValidationError("sampled indices must be distinct")
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != len(idx):
            raise ValidationError(
                f"need one value per sampled index: {len(idx)} indices, "
                f"values shape {values.shape}"
            )
        object.__setattr__(self, "sampled_indices", idx)
        object.__setattr__(self, "values", values)

    @property
    def n_observed(self) -> int:
        return len(self.sampled_indices)

    @cached_property
    def index_array(self) -> np.ndarray:
        return np.asarray(self.sampled_indices, dtype=np.int64)

    def validate_against(self, n_vertices: int) -> None:
        if self.n_observed > n_vertices:
            raise ValidationError(
                f"{self.n_observed} observations for {n_vertices} vertices"
            )
        if self.n_observed and self.index_array.max() >= n_vertices:
            raise ValidationError(
                f"sampled index {self.index_array.max()} is outside "
                f"[0, {n_vertices})"
            )


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the recovery iteration.

    `project=False` (plain unprojected descent) is only allowed with the
    squared-error loss; cross entropy needs iterates inside [0, 1].
    """

    lam: float = 0.001
    step_size: float = 0.1
    max_iters: int = 10000
    grad_tol: float = 1e-6
    loss_kind: str = "cross_entropy"
    clamp_eps: float = 1e-6
    init_unobserved: float = 0.5
    project: bool = True
    record_trace: bool = True

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lam must be nonnegative, got {self.lam}")
        if self.step_size <= 0:
            raise ValidationError(f"step_size must be positive, got {self.step_size}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.grad_tol < 0:
            raise ValidationError(f"grad_tol must be nonnegative, got {self.grad_tol}")
        if self.loss_kind not in LOSS_KINDS:
            raise ValidationError(
                f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}"
            )
        if not 0 < self.clamp_eps < 0.5:
            raise ValidationError(f"clamp_eps must lie in (0, 0.5), got {self.clamp_eps}")
        if self.loss_kind == "cross_entropy" and not self.project:
            raise ValidationError("cross_entropy requires projected iterates")


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    """Estimate plus the bookkeeping of the descent run.

    `objective_trace` holds the objective at every visited iterate when the
    config recorded it (initial point included), otherwise it is empty;
    `final_objective` is always the objective at `estimate`.
    """

    estimate: np.ndarray
    iterations_run: int
    final_objective: float
    converged: bool
    objective_trace: np.ndarray


@dataclass(frozen=True, eq=False)
class TvModel:
    """Pretreated topology bundled with its per-cardinality operators."""

    n_vertices: int
    pretreated: PretreatedHypergraph
    operators: tuple[LaplacianOperator, ...]

    @classmethod
    def from_hypergraph(cls, h: Hypergraph) -> "TvModel":
        pre = pretreat(h)
        ops = tuple(LaplacianOperator(p) for p in decompose(pre.hypergraph))
        return cls(n_vertices=h.n_vertices, pretreated=pre, operators=ops)

    @property
    def transform(self):
        return self.pretreated.transform

    @cached_property
    def _flat_edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """CSR views (edge members/offsets, aux members/offsets) for the fused kernel."""
        edge_members: list[int] = []
        edge_ptr = [0]
        for op in self.operators:
            for row in op.members:
                edge_members.extend(int(v) for v in row)
                edge_ptr.append(len(edge_members))
        aux_members: list[int] = []
        aux_ptr = [0]
        for row in self.transform.aux_rows:
            aux_members.extend(row)
            aux_ptr.append(len(aux_members))
        return (
            np.asarray(edge_members, dtype=np.int64),
            np.asarray(edge_ptr, dtype=np.int64),
            np.asarray(aux_members, dtype=np.int64),
            np.asarray(aux_ptr, dtype=np.int64),
        )


def apply_sampling(obs: Observation, f) -> np.ndarray:
    """Select the observed coordinates of a full signal."""
    f = np.asarray(f, dtype=np.float64)
    obs.validate_against(f.shape[0])
    return f[obs.index_array]


def scatter(obs: Observation, values, n_vertices: int) -> np.ndarray:
    """Transpose of :func:`apply_sampling`: place values at the sampled indices."""
    values = _as_signal(values, obs.n_observed, "observed values")
    obs.validate_against(n_vertices)
    out = np.zeros(n_vertices)
    out[obs.index_array] = values
    return out


def loss_and_grad(kind: str, obs: Observation, f, clamp_eps: float = 1e-6):
    """Loss value and full-length gradient for the observed vertices.

    Cross entropy clamps the signal into [clamp_eps, 1-clamp_eps] before the
    logs; where the clamp was active the (locally flat) composition has zero
    derivative, so those gradient entries are zero.
    """
    if kind not in LOSS_KINDS:
        raise ValidationError(f"loss_kind must be one of {LOSS_KINDS}, got {kind!r}")
    f = np.asarray(f, dtype=np.float64)
    obs.validate_against(f.shape[0])
    y = obs.values
    fo = f[obs.index_array]
    grad = np.zeros(f.shape[0])
    if kind == "squared_error":
        residual = fo - y
        grad[obs.index_array] = residual
        return float(0.5 * np.dot(residual, residual)), grad
    if np.any((y < 0.0) | (y > 1.0)):
        raise ValidationError("cross_entropy needs observed values in [0, 1]")
    lo, hi = clamp_eps, 1.0 - clamp_eps
    fc = np.clip(fo, lo, hi)
    loss = float(-np.sum(y * np.log(fc) + (1.0 - y) * np.log(1.0 - fc)))
    inside = (fo >= lo) & (fo <= hi)
    grad[obs.index_array] = np.where(inside, -y / fc + (1.0 - y) / (1.0 - fc), 0.0)
    return loss, grad


def objective(cfg: SolverConfig, obs: Observation, model: TvModel, f) -> float:
    """Loss plus `lam` times the total variation."""
    loss, _ = loss_and_grad(cfg.loss_kind, obs, f, cfg.clamp_eps)
    return loss + cfg.lam * tv_total(model.operators, model.transform, f)


def threshold_labels(f, threshold: float = 0.5, lo: float = 0.05, hi: float = 0.95) -> np.ndarray:
    """Map a signal to two-level labels; values at the threshold go up."""
    f = np.asarray(f, dtype=np.float64)
    return np.where(f >= threshold, hi, lo)


def _initial_point(cfg: SolverConfig, obs: Observation, n: int) -> np.ndarray:
    f0 = np.full(n, float(cfg.init_unobserved))
    f0[obs.index_array] = obs.values
    return f0


def _recover_numpy(cfg: SolverConfig, obs: Observation, model: TvModel) -> RecoveryResult:
    f = _initial_point(cfg, obs, model.n_vertices)
    trace: list[float] = []
    iters = 0
    converged = False
    final_obj = np.nan
    for step in range(cfg.max_iters + 1):
        tv = tv_total(model.operators, model.transform, f)
        gtv = tv_gradient(model.operators, model.transform, f)
        loss, gloss = loss_and_grad(cfg.loss_kind, obs, f, cfg.clamp_eps)
        obj = loss + cfg.lam * tv
        grad = gloss + cfg.lam * gtv
        if not (np.isfinite(obj) and np.all(np.isfinite(grad))):
            raise DivergenceError(step)
        if cfg.record_trace:
            trace.append(obj)
        final_obj = obj
        if np.max(np.abs(grad), initial=0.0) < cfg.grad_tol:
            converged = True
            break
        if step == cfg.max_iters:
            break
        f = f - cfg.step_size * grad
        if cfg.project:
            np.clip(f, 0.0, 1.0, out=f)
        iters += 1
    return RecoveryResult(
        estimate=f,
        iterations_run=iters,
        final_objective=float(final_obj),
        converged=converged,
        objective_trace=np.asarray(trace),
    )


def _recover_fused(cfg: SolverConfig, obs: Observation, model: TvModel, kernel) -> RecoveryResult:
    edge_members, edge_ptr, aux_members, aux_ptr = model._flat_edges
    trace_buffer = np.empty(cfg.max_iters + 1 if cfg.record_trace else 1)
    estimate, iters, converged, final_obj, n_trace, bad_iter = kernel(
        edge_members,
        edge_ptr,
        aux_members,
        aux_ptr,
        model.n_vertices,
        obs.index_array,
        obs.values,
        cfg.loss_kind == "cross_entropy",
        cfg.clamp_eps,
        cfg.lam,
        cfg.step_size,
        cfg.max_iters,
        cfg.grad_tol,
        float(cfg.init_unobserved),
        cfg.project,
        cfg.record_trace,
        trace_buffer,
    )
    if bad_iter >= 0:
        raise DivergenceError(int(bad_iter))
    return RecoveryResult(
        estimate=estimate,
        iterations_run=int(iters),
        final_objective=float(final_obj),
        converged=bool(converged),
        objective_trace=trace_buffer[:n_trace].copy() if cfg.record_trace else np.empty(0),
    )


def recover(cfg: SolverConfig, obs: Observation, model: TvModel) -> RecoveryResult:
    """Run fixed-step gradient descent on the regularized objective.

    Starts from the observed values (unobserved entries at
    `cfg.init_unobserved`), stops when the gradient infinity norm drops below
    `cfg.grad_tol` or after `cfg.max_iters` steps, and raises
    :class:`DivergenceError` if the objective or gradient turns non-finite.
    """
    obs.validate_against(model.n_vertices)
    if cfg.loss_kind == "cross_entropy" and np.any(
        (obs.values < 0.0) | (obs.values > 1.0)
    ):
        raise ValidationError("cross_entropy needs observed values in [0, 1]")
    kernel = get_kernels().descent
    if kernel is not None:
        return _recover_fused(cfg, obs, model, kernel)
    return _recover_numpy(cfg, obs, model)


def load_observations(path) -> Observation:
    """Read observation files: one `vertex_index value` pair per line."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    indices: list[int] = []
    values: list[float] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        tokens = text.split()
        if len(tokens) != 2:
            raise ParseError("expected `vertex_index value`", path=path, line=lineno)
        try:
            indices.append(int(tokens[0]))
            values.append(float(tokens[1]))
        except ValueError:
            raise ParseError(f"bad tokens {tokens!r}", path=path, line=lineno)
    if not indices:
        raise ParseError("no observations in file", path=path)
    return Observation(tuple(indices), np.asarray(values))


def save_observations(obs: Observation, path) -> None:
    lines = [f"{i} {format(v, '.12g')}" for i, v in zip(obs.sampled_indices, obs.values)]
    write_text_atomic(path, "\n".join(lines) + "\n")
