"""Command-line front end: inspect, recover, sweep, verify.

Exit codes: 0 success, 2 file/parse failures, 3 validation failures,
4 runtime failures (divergence). Config files are JSON; every field is
validated and defaults follow the stock experiment settings (lambda 0.001,
threshold 0.5, signal levels 0.95/0.05).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from ._files import write_text_atomic
from ._kernels import active_backend
from .errors import DivergenceError, HypertvError, ParseError, ValidationError
from .experiment import (
    ExperimentConfig,
    load_dataset,
    load_schema,
    run_sweep,
    validate_schema,
    write_sweep_table,
)
from .hypergraph import decompose, load_hypergraph, pretreat
from .solver import (
    SolverConfig,
    TvModel,
    load_observations,
    recover,
    threshold_labels,
)
from .verify import SCOPES, run_checks

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_RUNTIME = 4

_SOLVER_KEYS = {
    "lambda": "lam",
    "lam": "lam",
    "step_size": "step_size",
    "max_iters": "max_iters",
    "grad_tol": "grad_tol",
    "loss_kind": "loss_kind",
    "clamp_eps": "clamp_eps",
    "init_unobserved": "init_unobserved",
    "project": "project",
    "record_trace": "record_trace",
}

_EXPERIMENT_KEYS = (
    "n_vertices", "fractions", "n_trials", "seed", "baseline_enabled",
    "baseline_alpha", "baseline_iterations", "signal_high", "signal_low",
    "threshold", "resample_per_trial", "max_cardinality", "solver",
)


def _load_json_config(path) -> dict:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", path=path, line=exc.lineno) from exc
    if not isinstance(payload, dict):
        raise ValidationError(f"{path}: config must be a JSON object")
    return payload


def _solver_config_from_dict(payload: dict, where: str) -> SolverConfig:
    kwargs = {}
    for key, value in payload.items():
        if key not in _SOLVER_KEYS:
            raise ValidationError(f"{where}: unknown solver field {key!r}")
        kwargs[_SOLVER_KEYS[key]] = value
    return SolverConfig(**kwargs)


def _split_recover_config(payload: dict, where: str):
    extras = {"threshold": 0.5, "label_low": 0.05, "label_high": 0.95}
    solver_fields = {}
    for key, value in payload.items():
        if key in extras:
            extras[key] = float(value)
        else:
            solver_fields[key] = value
    return _solver_config_from_dict(solver_fields, where), extras


def _experiment_config_from_dict(payload: dict, schema, where: str) -> ExperimentConfig:
    unknown = set(payload) - set(_EXPERIMENT_KEYS)
    if unknown:
        raise ValidationError(f"{where}: unknown experiment fields {sorted(unknown)}")
    solver_payload = dict(payload.get("solver", {}))
    solver_payload.setdefault("record_trace", False)
    kwargs = {k: v for k, v in payload.items() if k not in ("solver", "seed")}
    if "fractions" in kwargs:
        kwargs["fractions"] = tuple(float(x) for x in kwargs["fractions"])
    if "seed" in payload:
        kwargs["rng_seed"] = int(payload["seed"])
    return ExperimentConfig(
        schema=schema,
        solver=_solver_config_from_dict(solver_payload, where),
        **kwargs,
    )


def _parse_fractions(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ValidationError(f"bad fractions list {text!r}") from None


def cmd_inspect(args) -> int:
    h = load_hypergraph(args.hypergraph)
    histogram = {}
    for e in h.hyperedges:
        histogram[len(e)] = histogram.get(len(e), 0) + 1
    pre = pretreat(h)
    print(f"N={h.n_vertices} K={h.n_edges}")
    print(f"cardinalities: {dict(sorted(histogram.items()))}")
    for partial in decompose(h):
        print(f"  c={partial.cardinality}: {partial.n_edges} hyperedges")
    print(f"aux={pre.n_aux}")
    degrees = h.degrees()
    if h.n_edges:
        print(
            f"degrees: min={degrees.min()} mean={degrees.mean():.3f} max={degrees.max()}"
        )
    else:
        print("degrees: none (no hyperedges)")
    return EXIT_OK


def cmd_recover(args) -> int:
    h = load_hypergraph(args.hypergraph)
    obs = load_observations(args.observations)
    payload = _load_json_config(args.config) if args.config else {}
    cfg, extras = _split_recover_config(payload, str(args.config or "defaults"))
    overrides = {}
    if args.lam is not None:
        overrides["lam"] = args.lam
    if args.step is not None:
        overrides["step_size"] = args.step
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    obs.validate_against(h.n_vertices)

    model = TvModel.from_hypergraph(h)
    result = recover(cfg, obs, model)
    labels = threshold_labels(
        result.estimate, extras["threshold"], extras["label_low"], extras["label_high"]
    )
    out = Path(args.out)
    lines = ["# vertex estimate label"]
    for i, (value, label) in enumerate(zip(result.estimate, labels)):
        lines.append(f"{i} {format(value, '.12g')} {format(label, '.12g')}")
    write_text_atomic(out, "\n".join(lines) + "\n")
    print(f"wrote {out}")
    print(
        f"iterations={result.iterations_run} "
        f"final_objective={result.final_objective:.6g} "
        f"converged={result.converged}"
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    schema = load_schema(args.schema)
    ds = load_dataset(args.dataset, schema)
    payload = _load_json_config(args.config) if args.config else {}
    cfg = _experiment_config_from_dict(payload, schema, str(args.config or "defaults"))

    replacements = {}
    if args.trials is not None:
        replacements["n_trials"] = args.trials
    if args.seed is not None:
        replacements["rng_seed"] = args.seed
    if args.fractions is not None:
        replacements["fractions"] = _parse_fractions(args.fractions)
    solver_overrides = {}
    if args.lam is not None:
        solver_overrides["lam"] = args.lam
    if args.step is not None:
        solver_overrides["step_size"] = args.step
    if solver_overrides:
        replacements["solver"] = dataclasses.replace(cfg.solver, **solver_overrides)
    if replacements:
        cfg = dataclasses.replace(cfg, **replacements)
    validate_schema(ds, cfg.schema)

    rows = run_sweep(cfg, ds)
    write_sweep_table(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} fractions x {cfg.n_trials} trials, "
          f"seed {cfg.rng_seed}, backend {active_backend()})")
    for row in rows:
        baseline = (
            f" baseline={row.baseline_mean:.4f}" if row.baseline_mean is not None else ""
        )
        print(f"  fraction={row.fraction:g} accuracy={row.mean_accuracy:.4f}"
              f" (std {row.std_accuracy:.4f}){baseline}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(scope=args.scope, seed=args.seed)
    for result in results:
        print(result.line())
    if all(r.passed for r in results):
        print("all checks passed")
        return EXIT_OK
    return EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypertv",
        description="Hypergraph total-variation signal recovery toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_inspect = sub.add_parser("inspect", help="summarize a hypergraph file")
    p_inspect.add_argument("hypergraph", help="hypergraph text file")
    p_inspect.set_defaults(func=cmd_inspect)

    p_recover = sub.add_parser("recover", help="recover a signal from observations")
    p_recover.add_argument("hypergraph", help="hypergraph text file")
    p_recover.add_argument("observations", help="observation file (`vertex value` lines)")
    p_recover.add_argument("--config", help="JSON solver config")
    p_recover.add_argument("--out", default="estimate.txt", help="output estimate file")
    p_recover.add_argument("--lambda", dest="lam", type=float, default=None,
                           help="regularization weight override")
    p_recover.add_argument("--step", type=float, default=None, help="step size override")
    p_recover.set_defaults(func=cmd_recover)

    p_sweep = sub.add_parser("sweep", help="run the accuracy-vs-fraction experiment")
    p_sweep.add_argument("dataset", help="CSV dataset (id column + categorical features)")
    p_sweep.add_argument("schema", help="JSON schema sidecar")
    p_sweep.add_argument("--config", help="JSON experiment config")
    p_sweep.add_argument("--out", default="sweep.csv", help="output results table")
    p_sweep.add_argument("--trials", type=int, default=None, help="trials per fraction")
    p_sweep.add_argument("--seed", type=int, default=None, help="master RNG seed")
    p_sweep.add_argument("--fractions", default=None,
                         help="comma-separated observation fractions")
    p_sweep.add_argument("--lambda", dest="lam", type=float, default=None,
                         help="regularization weight override")
    p_sweep.add_argument("--step", type=float, default=None, help="step size override")
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the built-in correctness checks")
    p_verify.add_argument("--scope", default="all", choices=("all",) + SCOPES)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except HypertvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


def entrypoint() -> None:
    sys.exit(main())
