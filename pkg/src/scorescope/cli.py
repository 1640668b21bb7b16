"""Command-line interface.

Every command emits one structured JSON report carrying the tool version,
input digests, results, and the exact thresholds that influenced any
verdict, so heuristic calls can be audited after the fact. Exit codes: 0
ok, 1 input error, 2 precondition violation, 3 strict-mode finding.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, fields, is_dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .blocked import (
    BlockedDesign,
    BlockedSimConfig,
    analyze_blocked,
    read_blocked_csv,
    simulate_blocked,
    write_blocked_csv,
)
from .charts import curve_chart, rdc_chart
from .construction import (
    DEFAULT_BIAS_CUTOFFS,
    DEFAULT_LOGISTIC,
    BiasSeverity,
    bias_severity,
    class_balance,
    learnability_gap,
)
from .errors import InputError, PreconditionError
from .experiments import disagreement, impacted_traffic_curve, required_sample_size
from .ingest import ScoreRecord, dataset_from_arrays, parse_score_line, read_paired, read_score_log, read_tabular
from .monitor import (
    AlertEvent,
    AlertKind,
    MonitorConfig,
    OverrideRule,
    WindowedMonitor,
    apply_overrides,
    check_drift,
)
from .rdc import DEFAULT_DIAGNOSIS, RdcPattern, build_rdc, diagnose, one_vs_rest

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_PRECONDITION = 2
EXIT_STRICT = 3


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _digest(path: Path) -> dict:
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return {"path": str(path), "sha256": hashlib.sha256(data).hexdigest()}


def _envelope(command: str, inputs: dict, results: dict, decisions: dict) -> dict:
    return {
        "tool_version": __version__,
        "command": command,
        "inputs": {name: _digest(Path(p)) for name, p in inputs.items()},
        "results": _jsonable(results),
        "decisions": _jsonable(decisions),
    }


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_overrides(path: str | None) -> dict:
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config {path} must be a JSON object of sections")
    return data


def _apply_section(instance, section: str, overrides: dict):
    data = overrides.get(section, {})
    if not isinstance(data, dict):
        raise InputError(f"config section {section!r} must be an object")
    valid = {f.name for f in fields(instance)}
    unknown = sorted(set(data) - valid)
    if unknown:
        raise InputError(f"config section {section!r} has unknown keys: {', '.join(unknown)}")
    known_sections = {"diagnosis", "monitor", "bias_cutoffs", "logistic"}
    stray = sorted(set(overrides) - known_sections)
    if stray:
        raise InputError(f"unknown config sections: {', '.join(stray)}")
    return replace(instance, **data) if data else instance


def _diagnosis_config(args, overrides: dict):
    config = DEFAULT_DIAGNOSIS
    if getattr(args, "bins", None):
        config = replace(config, bins=args.bins)
    return _apply_section(config, "diagnosis", overrides)


# ---------------------------------------------------------------------------
# command handlers: each returns (inputs, results, decisions, exit_code)
# ---------------------------------------------------------------------------


def _model_chart_report(scores, bins, dconf):
    rdc = build_rdc(scores, bins)
    diag = diagnose(rdc, dconf)
    entry = {
        "n": rdc.n,
        "bins": rdc.bin_count,
        "counts": rdc.counts,
        "pattern": diag.pattern,
        "evidence": diag.evidence,
        "threshold_band": diag.threshold_band,
    }
    return rdc, diag, entry


def _safe_name(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in name)


def cmd_rdc(args):
    overrides = _load_overrides(args.config)
    dconf = _diagnosis_config(args, overrides)
    log = read_score_log(args.input, rescale=args.rescale)
    records = [r for r in log.records if args.model is None or r.model_id == args.model]
    if not records:
        raise PreconditionError("no score records to chart (check --model and the input log)")
    by_model: dict[str, list[ScoreRecord]] = {}
    for r in records:
        by_model.setdefault(r.model_id, []).append(r)

    results: dict = {"models": {}, "skipped_lines": log.skipped}
    charts: dict[str, str] = {}
    unhealthy = []
    for model_id in sorted(by_model):
        recs = by_model[model_id]
        rdc, diag, entry = _model_chart_report([r.score for r in recs], dconf.bins, dconf)
        if args.per_class:
            entry["classes"] = {}
            for label, class_rdc in one_vs_rest(recs, dconf.bins).items():
                class_diag = diagnose(class_rdc, dconf)
                entry["classes"][label] = {
                    "n": class_rdc.n,
                    "pattern": class_diag.pattern,
                    "evidence": class_diag.evidence,
                    "threshold_band": class_diag.threshold_band,
                }
                if class_diag.pattern is not RdcPattern.HEALTHY_BIMODAL:
                    unhealthy.append(f"{model_id}/{label}")
        results["models"][model_id] = entry
        if diag.pattern is not RdcPattern.HEALTHY_BIMODAL:
            unhealthy.append(model_id)
        if args.svg:
            locations = tuple(m["location"] for m in diag.evidence["modes"])
            charts[model_id] = rdc_chart(rdc, diag.threshold_band, locations, title=model_id)

    if args.svg:
        svg_path = Path(args.svg)
        if len(charts) == 1:
            svg_path.write_text(next(iter(charts.values())), encoding="utf-8")
        else:
            for model_id, chart in charts.items():
                target = svg_path.with_name(f"{svg_path.stem}_{_safe_name(model_id)}{svg_path.suffix}")
                target.write_text(chart, encoding="utf-8")

    code = EXIT_STRICT if args.strict and unhealthy else EXIT_OK
    if unhealthy:
        results["unhealthy"] = sorted(unhealthy)
    results["note"] = "pattern verdicts are heuristics; the thresholds behind them are conventions, listed under decisions"
    return {"input": args.input}, results, asdict(dconf), code


def cmd_bias(args):
    overrides = _load_overrides(args.config)
    cutoffs = _apply_section(DEFAULT_BIAS_CUTOFFS, "bias_cutoffs", overrides)
    logistic = _apply_section(DEFAULT_LOGISTIC, "logistic", overrides)
    dataset = read_tabular(args.input, args.availability_column, impute=args.impute)
    report = bias_severity(
        dataset.rows,
        dataset.target,
        folds=args.folds,
        permutations=args.permutations,
        seed=args.seed,
        workers=args.workers,
        cutoffs=cutoffs,
        logistic=logistic,
    )
    results = asdict(report)
    results["severity"] = report.severity
    results["note"] = (
        "severity cutoffs are heuristic conventions; a separable availability "
        "flag means metrics on labeled rows will not transfer to serving traffic"
    )
    decisions = {
        "cutoffs": asdict(cutoffs),
        "folds": args.folds,
        "permutations": args.permutations,
        "seed": args.seed,
        "logistic": asdict(logistic),
    }
    code = EXIT_STRICT if args.strict and report.severity is not BiasSeverity.NONE else EXIT_OK
    return {"input": args.input}, results, decisions, code


def _split_availability(dataset, availability_column: str):
    if availability_column not in dataset.feature_names:
        raise InputError(f"availability column {availability_column!r} not found")
    idx = dataset.feature_names.index(availability_column)
    flags = dataset.rows[:, idx]
    if not np.isin(flags, (0.0, 1.0)).all():
        raise InputError(f"availability column {availability_column!r} must be binary")
    features = np.delete(dataset.rows, idx, axis=1)
    names = tuple(n for n in dataset.feature_names if n != availability_column)
    return dataset_from_arrays(names, features, dataset.target), flags.astype(np.int8)


def cmd_setup(args):
    overrides = _load_overrides(args.config)
    cutoffs = _apply_section(DEFAULT_BIAS_CUTOFFS, "bias_cutoffs", overrides)
    logistic = _apply_section(DEFAULT_LOGISTIC, "logistic", overrides)
    dataset = read_tabular(args.input, args.target, impute=args.impute)
    flags = None
    if args.availability_column:
        dataset, flags = _split_availability(dataset, args.availability_column)
    balance = class_balance(dataset.target)
    learnability = learnability_gap(dataset, folds=args.folds, seed=args.seed, logistic=logistic)
    results = {"balance": asdict(balance), "learnability": asdict(learnability), "bias": None}
    if flags is not None:
        bias = bias_severity(
            dataset.rows,
            flags,
            folds=args.folds,
            permutations=args.permutations,
            seed=args.seed,
            workers=args.workers,
            cutoffs=cutoffs,
            logistic=logistic,
        )
        results["bias"] = asdict(bias)
        results["bias"]["severity"] = bias.severity
    decisions = {
        "folds": args.folds,
        "seed": args.seed,
        "logistic": asdict(logistic),
        "cutoffs": asdict(cutoffs),
    }
    return {"input": args.input}, results, decisions, EXIT_OK


def cmd_disagree(args):
    pairs = read_paired(args.input)
    report = disagreement(pairs, threshold=args.threshold)
    results = asdict(report)
    if report.rate == 0.0:
        results["note"] = "no testable difference: the models agree on every pair"
    return {"input": args.input}, results, {"threshold": args.threshold}, EXIT_OK


def cmd_power(args):
    report = required_sample_size(
        args.p_control,
        args.mde,
        alpha=args.alpha,
        power=args.power,
        disagreement_rate=args.disagreement,
    )
    decisions = {"alpha": args.alpha, "power": args.power}
    return {}, asdict(report), decisions, EXIT_OK


def _parse_grid(raw: str) -> list[float]:
    try:
        lo, hi, step = (float(v) for v in raw.split(":"))
    except ValueError as exc:
        raise InputError(f"grid must be lo:hi:step, got {raw!r}") from exc
    if step <= 0 or hi < lo:
        raise InputError(f"grid must ascend with positive step, got {raw!r}")
    out = []
    v = lo
    while v <= hi + 1e-9:
        out.append(round(v, 12))
        v += step
    return out


def cmd_curve(args):
    grid = _parse_grid(args.grid)
    series = impacted_traffic_curve(args.baseline, grid)
    if args.svg:
        Path(args.svg).write_text(curve_chart(series), encoding="utf-8")
    results = {
        "baseline_accuracy": args.baseline,
        "series": [{"accuracy": a, "upper_bound": b} for a, b in series],
        "alleviating_factors": [
            "larger output spaces raise the chance of disagreement",
            "finer-grained observation spaces (e.g. per-search predictions) do too",
            "models reused across many tasks make each disputed prediction count more",
        ],
    }
    return {}, results, {"grid": args.grid}, EXIT_OK


def _parse_allocation(raw: str) -> tuple[float, float, float]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise InputError(f"allocation must be three comma-separated proportions, got {raw!r}")
    try:
        values = tuple(float(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"allocation proportions must be numeric: {raw!r}") from exc
    return values


def cmd_blocked_simulate(args):
    design = BlockedDesign(_parse_allocation(args.allocation)) if args.allocation else BlockedDesign()
    config = BlockedSimConfig(
        n_users=args.n_users,
        base_cvr=args.base_cvr,
        latency_penalty=args.latency_penalty,
        feature_effect=args.feature_effect,
        design=design,
        seed=args.seed,
    )
    outcomes = simulate_blocked(config)
    if args.outcomes:
        write_blocked_csv(outcomes, args.outcomes)
    users, conversions = outcomes.counts()
    results = {
        "n_users": len(outcomes),
        "users": {v: int(n) for v, n in zip(("base", "v1", "v2"), users)},
        "conversions": {v: int(c) for v, c in zip(("base", "v1", "v2"), conversions)},
        "empirical_rates": {
            v: (float(c / n) if n else None) for v, c, n in zip(("base", "v1", "v2"), conversions, users)
        },
        "outcomes_csv": args.outcomes,
    }
    decisions = {
        "base_cvr": args.base_cvr,
        "latency_penalty": args.latency_penalty,
        "feature_effect": args.feature_effect,
        "allocation": list(design.allocation),
        "seed": args.seed,
    }
    return {}, results, decisions, EXIT_OK


def cmd_blocked_analyze(args):
    outcomes = read_blocked_csv(args.input)
    analysis = analyze_blocked(outcomes, alpha=args.alpha)
    return {"input": args.input}, asdict(analysis), {"alpha": args.alpha}, EXIT_OK


def _parse_override(raw: str) -> OverrideRule:
    # forms: model=<id>:score=<v>  |  entity=<id>:score=<v>  |  model=<id>:entity=<id>:score=<v>
    parts = dict()
    for piece in raw.split(":"):
        if "=" not in piece:
            raise InputError(f"override piece {piece!r} must be key=value")
        key, _, value = piece.partition("=")
        parts[key.strip()] = value.strip()
    unknown = set(parts) - {"model", "entity", "score"}
    if unknown or "score" not in parts:
        raise InputError(f"override {raw!r} must use model=/entity=/score= with score required")
    try:
        score = float(parts["score"])
    except ValueError as exc:
        raise InputError(f"override score must be numeric: {raw!r}") from exc
    try:
        return OverrideRule(score, model_id=parts.get("model"), entity_id=parts.get("entity"))
    except PreconditionError as exc:
        raise InputError(str(exc)) from exc


def _emit_alert(alert) -> None:
    line = {
        "model_id": alert.model_id,
        "window_index": alert.window_index,
        "kind": alert.kind.value,
        "detail": _jsonable(alert.detail),
    }
    sys.stdout.write(json.dumps(line, sort_keys=True) + "\n")
    sys.stdout.flush()


def cmd_watch(args):
    overrides = _load_overrides(args.config)
    dconf = _diagnosis_config(args, overrides)
    mconf = _apply_section(
        MonitorConfig(window_size=args.window, bins=dconf.bins, tv_threshold=args.tv_threshold, diagnosis=dconf),
        "monitor",
        overrides,
    )
    rules = [_parse_override(rule) for rule in args.override or []]

    references: dict[str, tuple] = {}  # model_id -> (rdc, diagnosis)
    if args.reference:
        ref_log = read_score_log(args.reference)
        by_model: dict[str, list[float]] = {}
        for rec in ref_log.records:
            by_model.setdefault(rec.model_id, []).append(rec.score)
        for model_id, scores in sorted(by_model.items()):
            rdc = build_rdc(scores, mconf.bins)
            references[model_id] = (rdc, diagnose(rdc, mconf.diagnosis))

    monitor = WindowedMonitor(mconf)
    alerts = []
    windows = 0
    partials = 0
    overridden_total = 0
    malformed = 0
    line_no = 0

    def handle(result) -> None:
        nonlocal windows, partials
        windows += 1
        partials += result.partial
        if result.model_id in references:
            ref_rdc, ref_diag = references[result.model_id]
            new_alerts = check_drift(
                result.rdc,
                ref_rdc,
                mconf,
                model_id=result.model_id,
                window_index=result.window_index,
                current_diagnosis=result.diagnosis,
                reference_diagnosis=ref_diag,
            )
        else:
            # first window becomes the model's reference; still surface pathology
            references[result.model_id] = (result.rdc, result.diagnosis)
            new_alerts = []
            if result.diagnosis.pattern is not RdcPattern.HEALTHY_BIMODAL:
                new_alerts = [
                    AlertEvent(
                        result.model_id,
                        result.window_index,
                        AlertKind.PATHOLOGY,
                        {"pattern": result.diagnosis.pattern.value},
                    )
                ]
        for alert in new_alerts:
            alerts.append(alert)
            _emit_alert(alert)

    path = Path(args.input)
    if not path.exists():
        raise InputError(f"cannot read score log {path}: file does not exist")
    with path.open("rb") as fh:
        while True:
            position = fh.tell()
            raw = fh.readline()
            if raw:
                if not raw.endswith(b"\n") and not args.once:
                    # incomplete trailing line; wait for the writer to finish it
                    fh.seek(position)
                    time.sleep(args.poll_interval)
                    continue
                line_no += 1
                line = raw.decode("utf-8", errors="replace")
                if not line.strip():
                    continue
                try:
                    record = parse_score_line(line, line_no)
                except InputError:
                    raise
                except ValueError:
                    malformed += 1
                    continue
                if rules:
                    [record], n_over = apply_overrides([record], rules)
                    overridden_total += n_over
                for result in monitor.feed(record):
                    handle(result)
            else:
                if args.once:
                    break
                time.sleep(args.poll_interval)
    for result in monitor.finish():
        handle(result)

    by_kind: dict[str, int] = {}
    for alert in alerts:
        by_kind[alert.kind.value] = by_kind.get(alert.kind.value, 0) + 1
    results = {
        "windows": windows,
        "partial_windows": partials,
        "alerts": by_kind,
        "alert_count": len(alerts),
        "dropped": monitor.dropped,
        "overridden": overridden_total,
        "malformed_lines": malformed,
    }
    decisions = {
        "window_size": mconf.window_size,
        "tv_threshold": mconf.tv_threshold,
        "diagnosis": asdict(mconf.diagnosis),
    }
    code = EXIT_STRICT if args.strict and alerts else EXIT_OK
    inputs = {"input": args.input}
    if args.reference:
        inputs["reference"] = args.reference
    return inputs, results, decisions, code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scorescope",
        description="Label-free scoring-model diagnostics and experiment design toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"scorescope {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", default=None, help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    common.add_argument("--config", default=None, help="JSON file overriding threshold defaults")
    common.add_argument("--strict", action="store_true", help="exit 3 when a finding fires")

    fmt = argparse.ArgumentDefaultsHelpFormatter

    p = sub.add_parser("rdc", parents=[common], formatter_class=fmt, help="chart and diagnose a score log")
    p.add_argument("--input", "-i", required=True, help="line-delimited score log")
    p.add_argument("--model", default=None, help="restrict to one model id")
    p.add_argument("--per-class", action="store_true", help="one-vs-rest chart per class label")
    p.add_argument("--rescale", action="store_true", help="min-max rescale out-of-range scores")
    p.add_argument("--bins", type=int, default=100, help="histogram bins")
    p.add_argument("--svg", default=None, help="write an SVG chart here")
    p.set_defaults(handler=cmd_rdc)

    p = sub.add_parser("bias", parents=[common], formatter_class=fmt, help="selection-bias severity probe")
    p.add_argument("--input", "-i", required=True, help="tabular CSV")
    p.add_argument("--availability-column", required=True, help="binary column: 1 when a label can be computed")
    p.add_argument("--impute", action="store_true", help="mean-impute missing feature cells")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds")
    p.add_argument("--permutations", type=int, default=200, help="label-shuffled refits")
    p.add_argument("--workers", type=int, default=1, help="threads for permutation refits")
    p.set_defaults(handler=cmd_bias)

    p = sub.add_parser("setup", parents=[common], formatter_class=fmt, help="score a problem construction")
    p.add_argument("--input", "-i", required=True, help="tabular CSV")
    p.add_argument("--target", required=True, help="binary target column")
    p.add_argument("--availability-column", default=None, help="also run the bias probe on this flag column")
    p.add_argument("--impute", action="store_true", help="mean-impute missing feature cells")
    p.add_argument("--folds", type=int, default=5, help="cross-validation folds")
    p.add_argument("--permutations", type=int, default=200, help="label-shuffled refits (bias probe)")
    p.add_argument("--workers", type=int, default=1, help="threads for permutation refits")
    p.set_defaults(handler=cmd_setup)

    p = sub.add_parser("disagree", parents=[common], formatter_class=fmt, help="disagreement rate of paired predictions")
    p.add_argument("--input", "-i", required=True, help="paired-prediction CSV")
    p.add_argument("--threshold", type=float, default=0.5, help="binarization threshold for score inputs")
    p.set_defaults(handler=cmd_disagree)

    p = sub.add_parser("power", parents=[common], formatter_class=fmt, help="sample size diluted by disagreement")
    p.add_argument("--p-control", type=float, required=True, help="control conversion rate")
    p.add_argument("--mde", type=float, required=True, help="minimum detectable effect (absolute)")
    p.add_argument("--alpha", type=float, default=0.05, help="two-sided significance level")
    p.add_argument("--power", type=float, default=0.8, help="target power")
    p.add_argument("--disagreement", type=float, default=1.0, help="fraction of traffic the models dispute")
    p.set_defaults(handler=cmd_power)

    p = sub.add_parser("curve", parents=[common], formatter_class=fmt, help="impacted-traffic upper bound curve")
    p.add_argument("--baseline", type=float, required=True, help="baseline model accuracy")
    p.add_argument("--grid", required=True, help="challenger accuracies as lo:hi:step")
    p.add_argument("--svg", default=None, help="write an SVG chart here")
    p.set_defaults(handler=cmd_curve)

    blocked = sub.add_parser("blocked", help="3-variant blocked experiment")
    blocked_sub = blocked.add_subparsers(dest="subcommand", required=True)

    p = blocked_sub.add_parser("simulate", parents=[common], formatter_class=fmt, help="simulate outcomes")
    p.add_argument("--n-users", type=int, required=True, help="users to draw")
    p.add_argument("--base-cvr", type=float, required=True, help="base conversion rate")
    p.add_argument("--latency-penalty", type=float, default=0.0, help="additive rate delta on v1 and v2")
    p.add_argument("--feature-effect", type=float, default=0.0, help="additive rate delta on v2 only")
    p.add_argument("--allocation", default=None, help="base,v1,v2 proportions (default equal thirds)")
    p.add_argument("--outcomes", default=None, help="write the outcome CSV here")
    p.set_defaults(handler=cmd_blocked_simulate)

    p = blocked_sub.add_parser("analyze", parents=[common], formatter_class=fmt, help="analyze an outcome CSV")
    p.add_argument("--input", "-i", required=True, help="outcomes CSV (variant,converted)")
    p.add_argument("--alpha", type=float, default=0.05, help="CI significance level")
    p.set_defaults(handler=cmd_blocked_analyze)

    p = sub.add_parser("watch", parents=[common], formatter_class=fmt, help="tail a score log and alert")
    p.add_argument("--input", "-i", required=True, help="score log to tail")
    p.add_argument("--reference", default=None, help="score log providing per-model reference charts")
    p.add_argument("--window", type=int, default=1000, help="records per tumbling window")
    p.add_argument("--bins", type=int, default=100, help="histogram bins")
    p.add_argument("--tv-threshold", type=float, default=0.15, help="total variation drift threshold")
    p.add_argument("--poll-interval", type=float, default=1.0, help="seconds between polls for new lines")
    p.add_argument("--once", action="store_true", help="process current contents and exit")
    p.add_argument(
        "--override",
        action="append",
        metavar="RULE",
        help="force scores, e.g. model=m1:score=0.99 or entity=e7:score=0.5 (first match wins)",
    )
    p.set_defaults(handler=cmd_watch)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command if not hasattr(args, "subcommand") else f"{args.command} {args.subcommand}"
    try:
        inputs, results, decisions, code = args.handler(args)
        _emit(_envelope(command, inputs, results, decisions), args.output)
        return code
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def entrypoint() -> None:
    sys.exit(main())
