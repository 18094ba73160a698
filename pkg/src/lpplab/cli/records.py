"""Result records, JSON Lines persistence, and CSV summaries.

Records are emitted deterministically: fixed key order, floats printed with
17 significant digits (lossless round-trip), volatile values (timestamp,
wall time) quarantined under the "meta" key so determinism comparisons can
drop exactly one field.
"""

from __future__ import annotations

import csv
import io
import json
import math

from .. import SCHEMA_VERSION, __version__
from ..errors import InsufficientData, IoError, SchemaError
from ..experiments import Estimate, FitModel, FitResult, StatSummary, fit_exponent


def fmt_float(x: float) -> str:
    """17 significant digits; integral values keep a trailing .0 so the
    round-trip preserves that the value was a real."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be recorded")
    s = format(float(x), ".17g")
    if not any(c in s for c in ".eE"):
        s += ".0"
    return s


def dumps_json(obj) -> str:
    """JSON with deterministic float formatting; insertion order preserved."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(repr(obj))
    elif isinstance(obj, float):
        out.append(fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            if not isinstance(k, str):
                raise TypeError(f"record keys must be strings, got {k!r}")
            out.append(json.dumps(k, ensure_ascii=False))
            out.append(": ")
            _emit(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} into a record")


def estimate_dict(est: Estimate) -> dict:
    return {
        "hits": est.hits,
        "trials": est.trials,
        "p_hat": est.p_hat,
        "ci_lo": est.ci_lo,
        "ci_hi": est.ci_hi,
    }


def summary_dict(s: StatSummary) -> dict:
    return {
        "count": s.count,
        "mean": s.mean,
        "variance": s.variance,
        "min": s.min,
        "max": s.max,
        "quantiles": {f"{q:.2f}": v for q, v in s.quantiles.items()},
    }


def make_record(
    experiment: str,
    config_echo: dict,
    params: dict,
    estimate: Estimate | None = None,
    summary: StatSummary | None = None,
    extra: dict | None = None,
    timestamp: str = "",
    wall_time_seconds: float = 0.0,
) -> dict:
    rec = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "experiment": experiment,
        "config": config_echo,
        "params": params,
    }
    if estimate is not None:
        rec["estimate"] = estimate_dict(estimate)
    if summary is not None:
        rec["summary"] = summary_dict(summary)
    if extra:
        rec["extra"] = extra
    rec["meta"] = {"timestamp": timestamp, "wall_time_seconds": wall_time_seconds}
    return rec


def records_to_jsonl(records: list[dict]) -> str:
    return "".join(dumps_json(r) + "\n" for r in records)


def parse_jsonl(text: str) -> list[dict]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"line {lineno}: not valid JSON: {e}") from e
        if not isinstance(rec, dict):
            raise SchemaError(f"line {lineno}: record must be an object")
        version = rec.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaError(
                f"line {lineno}: schema_version {version!r} is not supported "
                f"(this build reads version {SCHEMA_VERSION})"
            )
        records.append(rec)
    return records


def read_jsonl(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    return parse_jsonl(text)


def strip_meta(record: dict) -> dict:
    """The record without its volatile fields, for determinism comparisons."""
    return {k: v for k, v in record.items() if k != "meta"}


# ---------------------------------------------------------------------------
# CSV summaries

CSV_COLUMNS = [
    "kind",
    "experiment",
    "n",
    "t",
    "gamma",
    "A",
    "c_const",
    "m_const",
    "delta",
    "x",
    "psi_lo",
    "psi_hi",
    "i_range",
    "replicas",
    "hits",
    "trials",
    "p_hat",
    "ci_lo",
    "ci_hi",
    "count",
    "mean",
    "variance",
    "min",
    "max",
    "q05",
    "q25",
    "q50",
    "q75",
    "q95",
    "model",
    "slope",
    "intercept",
    "r_squared",
    "n_points",
    "excluded_deltas",
]

_QUANT_COLS = {"q05": "0.05", "q25": "0.25", "q50": "0.50", "q75": "0.75", "q95": "0.95"}

# experiments whose delta sweep gets a fitted exponent appended
_FIT_MODELS = {
    "small_ball": FitModel.STRETCHED_EXP,
    "one_point": FitModel.POWER,
}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return fmt_float(value)
    return str(value)


def _point_row(rec: dict) -> dict:
    params = rec.get("params", {})
    config = rec.get("config", {})
    row = {c: None for c in CSV_COLUMNS}
    row["kind"] = "point"
    row["experiment"] = rec.get("experiment")
    for key in ("n", "t", "gamma", "A", "c_const", "m_const", "delta", "x",
                "psi_lo", "psi_hi", "i_range"):
        if key in params:
            row[key] = params[key]
    row["replicas"] = config.get("replicas")
    est = rec.get("estimate")
    if est:
        for key in ("hits", "trials", "p_hat", "ci_lo", "ci_hi"):
            row[key] = est.get(key)
    summ = rec.get("summary")
    if summ:
        for key in ("count", "mean", "variance", "min", "max"):
            row[key] = summ.get(key)
        quant = summ.get("quantiles", {})
        for col, qkey in _QUANT_COLS.items():
            row[col] = quant.get(qkey)
    return row


def _fit_row(experiment: str, n, fit: FitResult) -> dict:
    row = {c: None for c in CSV_COLUMNS}
    row["kind"] = "fit"
    row["experiment"] = experiment
    row["n"] = n
    row["model"] = fit.model.value
    row["slope"] = fit.slope
    row["intercept"] = fit.intercept
    row["r_squared"] = fit.r_squared
    row["n_points"] = fit.n_points
    row["excluded_deltas"] = ";".join(fmt_float(d) for d in fit.excluded)
    return row


def _estimate_from_dict(d: dict) -> Estimate:
    try:
        return Estimate(
            hits=d["hits"],
            trials=d["trials"],
            p_hat=d["p_hat"],
            ci_lo=d["ci_lo"],
            ci_hi=d["ci_hi"],
        )
    except KeyError as e:
        raise SchemaError(f"estimate missing field {e}") from e


def summarize_records(records: list[dict]) -> str:
    """One CSV row per record, grouped by experiment in first-appearance
    order; exponent-fit rows appended after each sweep that supports one."""
    by_experiment: dict[str, list[dict]] = {}
    for rec in records:
        name = rec.get("experiment")
        if not isinstance(name, str):
            raise SchemaError("record missing experiment name")
        by_experiment.setdefault(name, []).append(rec)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for name, group in by_experiment.items():
        for rec in group:
            writer.writerow([_cell(_point_row(rec)[c]) for c in CSV_COLUMNS])
        model = _FIT_MODELS.get(name)
        if model is None:
            continue
        # one fit per (config echo, n): the points of a single sweep
        sweeps: dict[str, list[dict]] = {}
        for rec in group:
            key = dumps_json([rec.get("config", {}), rec.get("params", {}).get("n")])
            sweeps.setdefault(key, []).append(rec)
        for sweep in sweeps.values():
            points = [
                (rec["params"]["delta"], _estimate_from_dict(rec["estimate"]))
                for rec in sweep
                if "estimate" in rec and "delta" in rec.get("params", {})
            ]
            if len(points) < 2:
                continue
            try:
                fit = fit_exponent(points, model)
            except InsufficientData:
                continue
            writer.writerow(
                [_cell(_fit_row(name, sweep[0]["params"].get("n"), fit)[c]) for c in CSV_COLUMNS]
            )
    return buf.getvalue()
