"""Semi-supervised recovery experiment on categorical datasets.

Pipeline per trial: subsample vertices from the dataset, build a hypergraph
whose hyperedges group vertices that share a feature value, read the binary
signal off one held-out feature (two levels, 0.95/0.05), observe a fraction of
the vertices noiselessly, recover the rest, threshold at 0.5, and score
accuracy over the unobserved vertices only. A clique-expansion label
propagation runs on the identical split as the baseline.

Trials draw their generators deterministically from
``(rng_seed, fraction_index, trial_index)``, so sweeps are reproducible and
trivially parallelizable.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import numpy as np

from ._files import write_text_atomic
from .errors import ParseError, ValidationError
from .hypergraph import Hypergraph
from .solver import Observation, SolverConfig, TvModel, recover


@dataclass(frozen=True)
class Dataset:
    """Rectangular table of categorical feature values keyed by instance id."""

    instance_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.instance_ids:
            raise ValidationError("dataset has no instances")
        if not self.feature_names:
            raise ValidationError("dataset has no features")
        if len(set(self.instance_ids)) != len(self.instance_ids):
            raise ValidationError("instance ids must be unique")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValidationError("feature names must be unique")
        if len(self.rows) != len(self.instance_ids):
            raise ValidationError("one row per instance id required")
        width = len(self.feature_names)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValidationError(
                    f"row {i} has {len(row)} values, expected {width}"
                )

    @property
    def n_instances(self) -> int:
        return len(self.instance_ids)

    @cached_property
    def _feature_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.feature_names)}

    def column(self, feature: str) -> tuple[str, ...]:
        try:
            i = self._feature_index[feature]
        except KeyError:
            raise ValidationError(f"unknown feature {feature!r}") from None
        return tuple(row[i] for row in self.rows)


@dataclass(frozen=True)
class DatasetSchema:
    """Feature kinds plus the signal declaration for one dataset.

    Boolean features spawn one hyperedge (vertices holding `boolean_true`);
    multi-value features spawn one hyperedge per distinct value. The signal
    feature is excluded from topology generation.
    """

    signal_feature: str
    boolean_features: tuple[str, ...]
    multivalue_features: tuple[str, ...]
    positive_value: str = "1"
    negative_value: str = "0"
    boolean_true: str = "1"

    def __post_init__(self):
        overlap = set(self.boolean_features) & set(self.multivalue_features)
        if overlap:
            raise ValidationError(f"features declared twice: {sorted(overlap)}")
        declared = set(self.boolean_features) | set(self.multivalue_features)
        if self.signal_feature not in declared:
            raise ValidationError(
                f"signal feature {self.signal_feature!r} is not declared"
            )
        if self.positive_value == self.negative_value:
            raise ValidationError("positive and negative signal values must differ")


_SCHEMA_REQUIRED = ("signal_feature", "boolean_features", "multivalue_features")
_SCHEMA_OPTIONAL = ("positive_value", "negative_value", "boolean_true")


def load_schema(path) -> DatasetSchema:
    """Read the JSON sidecar schema."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", path=path, line=exc.lineno) from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: schema must be a JSON object")
    unknown = set(payload) - set(_SCHEMA_REQUIRED) - set(_SCHEMA_OPTIONAL)
    if unknown:
        raise ValidationError(f"{path}: unknown schema keys {sorted(unknown)}")
    missing = [key for key in _SCHEMA_REQUIRED if key not in payload]
    if missing:
        raise ValidationError(f"{path}: missing schema keys {missing}")
    kwargs = dict(payload)
    kwargs["boolean_features"] = tuple(str(v) for v in payload["boolean_features"])
    kwargs["multivalue_features"] = tuple(str(v) for v in payload["multivalue_features"])
    return DatasetSchema(**kwargs)


def validate_schema(ds: Dataset, schema: DatasetSchema) -> None:
    """Check the schema against the dataset before any computation."""
    known = set(ds.feature_names)
    for name in (schema.signal_feature, *schema.boolean_features, *schema.multivalue_features):
        if name not in known:
            raise ValidationError(f"schema names unknown feature {name!r}")
    declared = set(schema.boolean_features) | set(schema.multivalue_features)
    undeclared = known - declared
    if undeclared:
        raise ValidationError(
            f"schema leaves features undeclared: {sorted(undeclared)}"
        )
    signal = set(ds.column(schema.signal_feature))
    expected = {schema.positive_value, schema.negative_value}
    if not signal <= expected:
        raise ValidationError(
            f"signal feature {schema.signal_feature!r} takes values "
            f"{sorted(signal - expected)} outside {sorted(expected)}"
        )


def load_dataset(path, schema: DatasetSchema | None = None) -> Dataset:
    """Read a comma-separated dataset: header line, id column, feature columns."""
    path = Path(path)
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            table = list(reader)
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    rows = [(lineno, row) for lineno, row in enumerate(table, start=1) if row]
    if not rows:
        raise ParseError("empty dataset file", path=path)
    header = rows[0][1]
    if len(header) < 2:
        raise ParseError("header must name an id column and at least one feature",
                         path=path, line=rows[0][0])
    if len(rows) == 1:
        raise ParseError("dataset has a header but no rows", path=path)
    feature_names = tuple(header[1:])
    ids: list[str] = []
    seen: dict[str, int] = {}
    data: list[tuple[str, ...]] = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise ParseError(
                f"row has {len(row)} columns, expected {len(header)}",
                path=path, line=lineno,
            )
        instance = row[0]
        if instance in seen:
            raise ParseError(
                f"duplicate instance id {instance!r} (first at line {seen[instance]})",
                path=path, line=lineno,
            )
        seen[instance] = lineno
        ids.append(instance)
        data.append(tuple(row[1:]))
    ds = Dataset(tuple(ids), feature_names, tuple(data))
    if schema is not None:
        validate_schema(ds, schema)
    return ds


def build_topology(ds: Dataset, schema: DatasetSchema, vertex_subset,
                   max_cardinality: int | None = None) -> Hypergraph:
    """Group subset vertices that share feature values into hyperedges.

    Vertex i of the result corresponds to dataset row `vertex_subset[i]`. The
    signal feature never contributes; hyperedges with fewer than 2 vertices
    are dropped; duplicates arising from different features are retained.
    """
    subset = [int(r) for r in vertex_subset]
    for r in subset:
        if not 0 <= r < ds.n_instances:
            raise ValidationError(f"subset row {r} outside the dataset")
    if len(set(subset)) != len(subset):
        raise ValidationError("vertex subset repeats a row")
    edges: list[tuple[int, ...]] = []

    def keep(members: list[int]) -> bool:
        if len(members) < 2:
            return False
        return max_cardinality is None or len(members) <= max_cardinality

    boolean = set(schema.boolean_features)
    multivalue = set(schema.multivalue_features)
    for fi, feature in enumerate(ds.feature_names):
        if feature == schema.signal_feature:
            continue
        values = [ds.rows[r][fi] for r in subset]
        if feature in boolean:
            members = [i for i, v in enumerate(values) if v == schema.boolean_true]
            if keep(members):
                edges.append(tuple(members))
        elif feature in multivalue:
            groups: dict[str, list[int]] = {}
            for i, v in enumerate(values):
                groups.setdefault(v, []).append(i)
            for value in sorted(groups):
                members = groups[value]
                if keep(members):
                    edges.append(tuple(members))
    return Hypergraph(len(subset), tuple(edges))


def signal_values(ds: Dataset, schema: DatasetSchema, vertex_subset,
                  high: float = 0.95, low: float = 0.05) -> np.ndarray:
    """Binary signal over the subset from the schema's signal feature."""
    column = ds.column(schema.signal_feature)
    out = np.empty(len(vertex_subset))
    for i, r in enumerate(vertex_subset):
        value = column[r]
        if value == schema.positive_value:
            out[i] = high
        elif value == schema.negative_value:
            out[i] = low
        else:
            raise ValidationError(
                f"instance {ds.instance_ids[r]!r} has signal value {value!r}, "
                f"expected {schema.positive_value!r} or {schema.negative_value!r}"
            )
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings of one recovery experiment over a dataset."""

    schema: DatasetSchema
    n_vertices: int = 30
    fractions: tuple[float, ...] = (0.4, 0.5, 0.6, 0.7)
    n_trials: int = 1000
    rng_seed: int = 0
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(record_trace=False))
    baseline_enabled: bool = True
    baseline_alpha: float = 0.9
    baseline_iterations: int = 200
    signal_high: float = 0.95
    signal_low: float = 0.05
    threshold: float = 0.5
    resample_per_trial: bool = True
    max_cardinality: int | None = None

    def __post_init__(self):
        if self.n_vertices < 2:
            raise ValidationError("n_vertices must be >= 2")
        if self.n_trials < 1:
            raise ValidationError("n_trials must be >= 1")
        fractions = tuple(float(x) for x in self.fractions)
        if not fractions:
            raise ValidationError("at least one fraction required")
        if list(fractions) != sorted(fractions):
            raise ValidationError("fractions must be sorted")
        for frac in fractions:
            if not 0.0 < frac < 1.0:
                raise ValidationError(f"fraction {frac} outside (0, 1)")
            n_obs = int(frac * self.n_vertices)
            if not 1 <= n_obs <= self.n_vertices - 1:
                raise ValidationError(
                    f"fraction {frac} yields {n_obs} observations for "
                    f"{self.n_vertices} vertices"
                )
        if not 0.0 < self.baseline_alpha <= 1.0:
            raise ValidationError("baseline_alpha must lie in (0, 1]")
        if self.baseline_iterations < 1:
            raise ValidationError("baseline_iterations must be >= 1")
        object.__setattr__(self, "fractions", fractions)


@dataclass(frozen=True)
class TrialReport:
    """Outcome of one subsample/observe/recover trial."""

    fraction: float
    trial_index: int
    accuracy_unobserved: float
    baseline_accuracy: float | None
    n_observed: int


@dataclass(frozen=True)
class SweepRow:
    """Aggregate over the trials of one observation fraction."""

    fraction: float
    mean_accuracy: float
    std_accuracy: float
    baseline_mean: float | None
    baseline_std: float | None
    n_trials: int


def baseline_label_propagation(h: Hypergraph, obs: Observation,
                               iterations: int = 200, alpha: float = 0.9,
                               init_unobserved: float = 0.5) -> np.ndarray:
    """Label propagation on the clique expansion of the hypergraph.

    Each cardinality-c hyperedge adds weight 1/(c-1) to every induced vertex
    pair. Iterates ``f <- alpha * S f + (1 - alpha) * f_init`` with S the
    symmetrically normalized adjacency, observed entries re-clamped to their
    values each round. Vertices without any neighbor keep their
    initialization.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha must lie in (0, 1]")
    if iterations < 1:
        raise ValidationError("iterations must be >= 1")
    obs.validate_against(h.n_vertices)
    n = h.n_vertices
    weights = np.zeros((n, n))
    for e in h.hyperedges:
        w = 1.0 / (len(e) - 1)
        for u, v in combinations(e, 2):
            weights[u, v] += w
            weights[v, u] += w
    degree = weights.sum(axis=1)
    connected = degree > 0
    inv_sqrt = np.zeros(n)
    inv_sqrt[connected] = degree[connected] ** -0.5
    s_norm = inv_sqrt[:, None] * weights * inv_sqrt[None, :]

    f_init = np.full(n, float(init_unobserved))
    f_init[obs.index_array] = obs.values
    f = f_init.copy()
    isolated = ~connected
    for _ in range(iterations):
        f = alpha * (s_norm @ f) + (1.0 - alpha) * f_init
        f[isolated] = f_init[isolated]
        f[obs.index_array] = obs.values
    return f


def run_trial(cfg: ExperimentConfig, ds: Dataset, fraction: float, rng,
              trial_index: int = 0, subset=None) -> TrialReport:
    """Run one trial: subsample, observe, recover, score unobserved accuracy.

    `rng` drives both the subsample draw (unless a fixed `subset` is given)
    and the observation split, in that order.
    """
    n = cfg.n_vertices
    if n > ds.n_instances:
        raise ValidationError(
            f"n_vertices={n} exceeds the {ds.n_instances}-instance dataset"
        )
    if subset is None:
        subset = np.sort(rng.choice(ds.n_instances, size=n, replace=False))
    else:
        subset = np.asarray(subset, dtype=np.int64)
        if subset.shape != (n,):
            raise ValidationError(f"fixed subset must hold {n} rows")
    n_observed = int(fraction * n)
    if not 1 <= n_observed <= n - 1:
        raise ValidationError(
            f"fraction {fraction} yields a degenerate split ({n_observed}/{n})"
        )
    topology = build_topology(ds, cfg.schema, subset, cfg.max_cardinality)
    truth = signal_values(ds, cfg.schema, subset, cfg.signal_high, cfg.signal_low)
    observed = np.sort(rng.choice(n, size=n_observed, replace=False))
    obs = Observation(tuple(int(i) for i in observed), truth[observed])
    unobserved = np.setdiff1d(np.arange(n), observed, assume_unique=True)

    model = TvModel.from_hypergraph(topology)
    result = recover(cfg.solver, obs, model)
    truth_pos = truth[unobserved] >= cfg.threshold
    accuracy = float(np.mean((result.estimate[unobserved] >= cfg.threshold) == truth_pos))

    baseline_accuracy = None
    if cfg.baseline_enabled:
        scores = baseline_label_propagation(
            topology, obs, cfg.baseline_iterations, cfg.baseline_alpha,
            cfg.solver.init_unobserved,
        )
        baseline_accuracy = float(
            np.mean((scores[unobserved] >= cfg.threshold) == truth_pos)
        )
    return TrialReport(
        fraction=float(fraction),
        trial_index=trial_index,
        accuracy_unobserved=accuracy,
        baseline_accuracy=baseline_accuracy,
        n_observed=n_observed,
    )


def trial_rng(rng_seed: int, fraction_index: int, trial_index: int):
    """Deterministic per-trial generator; parallel and serial runs agree."""
    return np.random.default_rng([rng_seed, fraction_index, trial_index])


def _aggregate(values: list[float]):
    arr = np.asarray(values)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def run_sweep(cfg: ExperimentConfig, ds: Dataset) -> list[SweepRow]:
    """Run `cfg.n_trials` trials per fraction and aggregate accuracies."""
    validate_schema(ds, cfg.schema)
    fixed_subset = None
    if not cfg.resample_per_trial:
        rng = np.random.default_rng([cfg.rng_seed])
        fixed_subset = np.sort(
            rng.choice(ds.n_instances, size=cfg.n_vertices, replace=False)
        )
    rows: list[SweepRow] = []
    for fi, fraction in enumerate(cfg.fractions):
        accuracies: list[float] = []
        baseline_accuracies: list[float] = []
        for ti in range(cfg.n_trials):
            try:
                report = run_trial(
                    cfg, ds, fraction, trial_rng(cfg.rng_seed, fi, ti),
                    trial_index=ti, subset=fixed_subset,
                )
            except Exception as exc:
                exc.args = (f"trial {ti} at fraction {fraction}: {exc}",)
                raise
            accuracies.append(report.accuracy_unobserved)
            if report.baseline_accuracy is not None:
                baseline_accuracies.append(report.baseline_accuracy)
        mean, std = _aggregate(accuracies)
        if baseline_accuracies:
            b_mean, b_std = _aggregate(baseline_accuracies)
        else:
            b_mean = b_std = None
        rows.append(SweepRow(
            fraction=float(fraction),
            mean_accuracy=mean,
            std_accuracy=std,
            baseline_mean=b_mean,
            baseline_std=b_std,
            n_trials=cfg.n_trials,
        ))
    return rows


def format_sweep_table(rows) -> str:
    """Render sweep rows as the comma-separated results table."""
    def fmt(x):
        return "" if x is None else format(float(x), ".12g")

    lines = ["fraction,mean_accuracy,std_accuracy,baseline_mean,baseline_std,n_trials"]
    for row in rows:
        lines.append(",".join([
            fmt(row.fraction),
            fmt(row.mean_accuracy),
            fmt(row.std_accuracy),
            fmt(row.baseline_mean),
            fmt(row.baseline_std),
            str(row.n_trials),
        ]))
    return "\n".join(lines) + "\n"


def write_sweep_table(rows, path) -> None:
    write_text_atomic(path, format_sweep_table(rows))
