"""Dense symmetric-tensor oracle.

Materializes adjacency/degree/Laplacian tensors entry by entry and contracts
them with n-mode products. Storage is D**c doubles, so this exists purely to
cross-check the implicit operators on small instances; a hard size budget
keeps it out of production paths. Unlike the operator module, odd orders are
allowed here: the negative-value counter-examples for odd-order contractions
are part of what the oracle is for.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleBudgetError, ValidationError
from .hypergraph import UniformPartial, _as_signal

ORACLE_BUDGET = 10**7


@dataclass(frozen=True, eq=False)
class DenseSymmetricTensor:
    """Order-c cube of side `dimension`, symmetric under index permutations."""

    order: int
    dimension: int
    entries: np.ndarray

    def __post_init__(self):
        expected = (self.dimension,) * self.order
        if self.entries.shape != expected:
            raise ValidationError(
                f"entries shape {self.entries.shape} does not match {expected}"
            )


def _check_budget(partial: UniformPartial) -> None:
    size = partial.dimension**partial.cardinality
    if size > ORACLE_BUDGET:
        raise OracleBudgetError(
            f"dense tensor would hold {size} entries, over the oracle budget "
            f"of {ORACLE_BUDGET}"
        )


def build_dense_adjacency(partial: UniformPartial) -> DenseSymmetricTensor:
    """Adjacency tensor: weight 1/(c-1)! at every permutation of each hyperedge.

    Duplicate hyperedges accumulate, matching their double weight in degrees.
    """
    _check_budget(partial)
    c, dim = partial.cardinality, partial.dimension
    entries = np.zeros((dim,) * c)
    weight = 1.0 / math.factorial(c - 1)
    for edge in partial.hyperedges:
        for perm in itertools.permutations(edge):
            entries[perm] += weight
    return DenseSymmetricTensor(order=c, dimension=dim, entries=entries)


def build_dense_laplacian(partial: UniformPartial) -> DenseSymmetricTensor:
    """Laplacian tensor: per-vertex degrees on the diagonal minus adjacency."""
    adjacency = build_dense_adjacency(partial)
    c, dim = partial.cardinality, partial.dimension
    entries = -adjacency.entries
    degrees = np.bincount(partial.members.ravel(), minlength=dim).astype(np.float64)
    diag = (np.arange(dim),) * c
    entries[diag] += degrees
    return DenseSymmetricTensor(order=c, dimension=dim, entries=entries)


def nmode_contract_full(tensor: DenseSymmetricTensor, f) -> float:
    """Contract the tensor with the signal along every mode."""
    f = _as_signal(f, tensor.dimension)
    out = tensor.entries
    for _ in range(tensor.order):
        out = np.dot(out, f)
    return float(out)


def nmode_contract_vector(tensor: DenseSymmetricTensor, f) -> np.ndarray:
    """Contract along all modes but the first, leaving a length-D vector."""
    f = _as_signal(f, tensor.dimension)
    out = tensor.entries
    for _ in range(tensor.order - 1):
        out = np.dot(out, f)
    return np.asarray(out, dtype=np.float64)
