"""Implicit per-cardinality Laplacian operators: total variation and gradient.

A cardinality-c partial hypergraph defines an order-c Laplacian tensor
(degree minus adjacency). The tensor is never materialized here; every
operation uses the per-hyperedge closed form. For a hyperedge e of cardinality
c the fully contracted quadratic-like form contributes
``sum_{v in e} f_v**c - c * prod_{v in e} f_v``, which is nonnegative for even
c (arithmetic vs geometric mean), and the once-partial contraction has entry
``f_i**(c-1) - prod_{u in e, u != i} f_u`` for each i in e.

Dense tensors live in :mod:`hypertv.dense` as a test oracle only.
"""

from __future__ import annotations

import numpy as np

from ._kernels import get_kernels
from .errors import ValidationError
from .hypergraph import TransformationMatrix, UniformPartial, _as_signal, apply_transform, transpose_apply

PSD_TOLERANCE = -1e-9


class LaplacianOperator:
    """Implicit Laplacian for one uniform partial: hyperedge list plus degrees.

    Treat instances as immutable; `members` is the (n_edges, cardinality)
    index matrix handed to the kernels.
    """

    def __init__(self, partial: UniformPartial):
        self.partial = partial
        self.members = np.ascontiguousarray(partial.members)
        self.degrees = np.bincount(
            self.members.ravel(), minlength=partial.dimension
        ).astype(np.float64)

    @property
    def cardinality(self) -> int:
        return self.partial.cardinality

    @property
    def dimension(self) -> int:
        return self.partial.dimension

    def __repr__(self) -> str:
        return (
            f"LaplacianOperator(c={self.cardinality}, dim={self.dimension}, "
            f"edges={self.partial.n_edges})"
        )


def _require_even(op: LaplacianOperator) -> None:
    if op.cardinality % 2 != 0:
        raise ValidationError(
            f"total variation requires an even cardinality, got {op.cardinality}; "
            "pretreat the hypergraph first"
        )


def tv_partial(op: LaplacianOperator, f_tilde) -> float:
    """Fully contracted form of one even-order Laplacian at the given signal."""
    _require_even(op)
    f = _as_signal(f_tilde, op.dimension)
    return get_kernels().tv_value(op.members, f)


def contract(op: LaplacianOperator, f_tilde) -> np.ndarray:
    """Contract the operator with the signal along all modes but the first."""
    f = _as_signal(f_tilde, op.dimension)
    out = np.zeros(op.dimension)
    get_kernels().tv_contract_add(op.members, f, out, 1.0)
    return out


def _check_parts(parts, tm: TransformationMatrix) -> None:
    for op in parts:
        if op.dimension != tm.n_extended:
            raise ValidationError(
                f"operator dimension {op.dimension} does not match the "
                f"pretreated size {tm.n_extended}"
            )


def tv_total(parts, tm: TransformationMatrix, f) -> float:
    """Total variation of a signal: sum of the per-cardinality contractions
    evaluated at the pretreated extension of `f`."""
    _check_parts(parts, tm)
    f_tilde = apply_transform(tm, f)
    return sum(tv_partial(op, f_tilde) for op in parts)


def tv_gradient(parts, tm: TransformationMatrix, f) -> np.ndarray:
    """Gradient of :func:`tv_total` with respect to the original signal.

    Each cardinality-c operator contributes c times its partial contraction at
    the extended signal, pulled back through the transform transpose.
    """
    _check_parts(parts, tm)
    f_tilde = apply_transform(tm, f)
    kernels = get_kernels()
    g_tilde = np.zeros(tm.n_extended)
    for op in parts:
        _require_even(op)
        kernels.tv_contract_add(op.members, f_tilde, g_tilde, float(op.cardinality))
    return transpose_apply(tm, g_tilde)


def check_psd(partial: UniformPartial, n_samples: int = 1000, rng_seed=0):
    """Sample standard-normal signals and report the minimum contraction value.

    Returns ``(ok, worst)`` where `ok` is True when the minimum stays above
    ``PSD_TOLERANCE``. Even-order operators are positive semidefinite, so a
    violation beyond rounding indicates a bug.
    """
    op = LaplacianOperator(partial)
    _require_even(op)
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    worst = np.inf
    for _ in range(n_samples):
        value = tv_partial(op, rng.standard_normal(op.dimension))
        if value < worst:
            worst = value
    return bool(worst >= PSD_TOLERANCE), float(worst)
