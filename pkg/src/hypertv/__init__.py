"""Multi-order hypergraph Laplacian total variation and signal recovery.

A hypergraph decomposes into uniform partials, one per hyperedge cardinality;
each partial acts as an implicit Laplacian tensor. Their summed contractions
define a total-variation smoothness measure (after pretreating odd
cardinalities with mean-valued auxiliary vertices), and regularized gradient
descent recovers partially observed vertex signals. An experiment harness
reproduces semi-supervised classification on categorical datasets such as the
bundled zoo table.
"""

from ._kernels import active_backend, available_backends, get_kernels, set_backend
from .dense import (
    DenseSymmetricTensor,
    build_dense_adjacency,
    build_dense_laplacian,
    nmode_contract_full,
    nmode_contract_vector,
)
from .errors import (
    DivergenceError,
    HypertvError,
    OracleBudgetError,
    ParseError,
    ValidationError,
)
from .experiment import (
    Dataset,
    DatasetSchema,
    ExperimentConfig,
    SweepRow,
    TrialReport,
    baseline_label_propagation,
    build_topology,
    load_dataset,
    load_schema,
    run_sweep,
    run_trial,
    signal_values,
    trial_rng,
    validate_schema,
    write_sweep_table,
)
from .hypergraph import (
    Hypergraph,
    PretreatedHypergraph,
    TransformationMatrix,
    UniformPartial,
    apply_transform,
    decompose,
    load_hypergraph,
    pretreat,
    save_hypergraph,
    transpose_apply,
)
from .laplacian import (
    PSD_TOLERANCE,
    LaplacianOperator,
    check_psd,
    contract,
    tv_gradient,
    tv_partial,
    tv_total,
)
from .solver import (
    Observation,
    RecoveryResult,
    SolverConfig,
    TvModel,
    apply_sampling,
    load_observations,
    loss_and_grad,
    objective,
    recover,
    save_observations,
    scatter,
    threshold_labels,
)

__version__ = "0.1.0"

__all__ = [
    "DenseSymmetricTensor",
    "Dataset",
    "DatasetSchema",
    "DivergenceError",
    "ExperimentConfig",
    "Hypergraph",
    "HypertvError",
    "LaplacianOperator",
    "Observation",
    "OracleBudgetError",
    "PSD_TOLERANCE",
    "ParseError",
    "PretreatedHypergraph",
    "RecoveryResult",
    "SolverConfig",
    "SweepRow",
    "TransformationMatrix",
    "TrialReport",
    "TvModel",
    "UniformPartial",
    "ValidationError",
    "active_backend",
    "apply_sampling",
    "apply_transform",
    "available_backends",
    "baseline_label_propagation",
    "build_dense_adjacency",
    "build_dense_laplacian",
    "build_topology",
    "check_psd",
    "contract",
    "decompose",
    "get_kernels",
    "load_dataset",
    "load_hypergraph",
    "load_observations",
    "load_schema",
    "loss_and_grad",
    "nmode_contract_full",
    "nmode_contract_vector",
    "objective",
    "pretreat",
    "recover",
    "run_sweep",
    "run_trial",
    "save_hypergraph",
    "save_observations",
    "scatter",
    "set_backend",
    "signal_values",
    "threshold_labels",
    "trial_rng",
    "transpose_apply",
    "tv_gradient",
    "tv_partial",
    "tv_total",
    "validate_schema",
    "write_sweep_table",
]
