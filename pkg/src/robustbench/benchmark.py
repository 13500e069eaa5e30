"""Benchmark orchestration: samples x attacks, robustness aggregation, report.

For every sample all configured attacks run in order on one shared
:class:`Adversarial`, so later attacks resume from the best perturbation
found so far. The per-sample robustness is the smallest perturbation found
by any attack, and the model robustness is the mean over samples for which
some finite value exists.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adversarial import Adversarial
from .attacks import CATALOG
from .core import seeded_rng
from .criteria import Criterion, criterion_from_config
from .datasets import load_dataset, load_precomputed
from .distances import DistanceMeasure
from .errors import AttackError, ConfigError, RobustBenchError
from .models import load_model

SCHEMA_VERSION = 1
WALL_TIME_KEYS = ("wall_time",)


@dataclass
class AttackSpec:
    name: str
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"name": self.name, "params": dict(sorted(self.params.items()))}


@dataclass
class BenchmarkConfig:
    model_path: str
    dataset_path: str
    dataset_format: str = "csv"
    labels_path: str | None = None
    attacks: list = field(default_factory=list)
    criterion: dict = field(default_factory=lambda: {"name": "misclassification"})
    distance: str = "mse"
    global_seed: int = 0
    sample_limit: int | None = None
    parallelism: int = 1

    def __post_init__(self):
        if self.dataset_format not in ("csv", "idx"):
            raise ConfigError(f"unknown dataset format {self.dataset_format!r}")
        if not self.attacks:
            raise ConfigError("config lists no attacks")
        specs = []
        for a in self.attacks:
            if isinstance(a, str):
                a = AttackSpec(a)
            elif isinstance(a, dict):
                if "name" not in a:
                    raise ConfigError(f"attack entry without name: {a!r}")
                a = AttackSpec(a["name"], dict(a.get("params", {})))
            if a.name not in CATALOG:
                raise ConfigError(f"unknown attack {a.name!r}; choose from {sorted(CATALOG)}")
            specs.append(a)
        self.attacks = specs
        if isinstance(self.criterion, str):
            self.criterion = {"name": self.criterion}
        criterion_from_config(self.criterion)
        DistanceMeasure.parse(self.distance)
        if self.sample_limit is not None and self.sample_limit < 0:
            raise ConfigError("sample_limit must be non-negative")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")


_CONFIG_KEYS = {
    "model", "dataset", "attacks", "criterion", "distance", "seed", "sample_limit", "parallelism",
}


def config_from_dict(doc, base_dir=".") -> BenchmarkConfig:
    """Config JSON layout::

        {"model": "model.json",
         "dataset": {"path": "data.csv", "format": "csv", "labels": null},
         "attacks": [{"name": "fgsm", "params": {"grid_size": 50}}, "deepfool_l2"],
         "criterion": {"name": "top_k", "k": 2},
         "distance": "mse", "seed": 0, "sample_limit": null, "parallelism": 1}

    Relative paths are resolved against ``base_dir``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key in ("model", "dataset", "attacks"):
        if key not in doc:
            raise ConfigError(f"config is missing {key!r}")
    base = Path(base_dir)

    def resolve(p):
        return None if p is None else str(base / p)

    dataset = doc["dataset"]
    if isinstance(dataset, str):
        dataset = {"path": dataset}
    attacks = []
    for a in doc["attacks"]:
        if isinstance(a, dict) and a.get("name") == "precomputed" and "path" in a.get("params", {}):
            a = {"name": a["name"], "params": {**a["params"], "path": resolve(a["params"]["path"])}}
        attacks.append(a)
    try:
        return BenchmarkConfig(
            model_path=resolve(doc["model"]),
            dataset_path=resolve(dataset["path"]),
            dataset_format=dataset.get("format", "csv"),
            labels_path=resolve(dataset.get("labels")),
            attacks=attacks,
            criterion=doc.get("criterion", {"name": "misclassification"}),
            distance=doc.get("distance", "mse"),
            global_seed=int(doc.get("seed", 0)),
            sample_limit=doc.get("sample_limit"),
            parallelism=int(doc.get("parallelism", 1)),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed config: {exc}") from None


def load_config(path) -> BenchmarkConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(doc, path.parent)


def build_attack(spec: AttackSpec, model=None, dataset_format="csv"):
    cls = CATALOG[spec.name]
    params = dict(spec.params)
    if spec.name == "precomputed":
        if "path" not in params:
            raise ConfigError("attack 'precomputed' needs a 'path' parameter")
        return load_precomputed(
            params["path"], params.get("format", dataset_format),
            model.bounds if model is not None else (0.0, 1.0),
            model.input_shape if model is not None else None,
        )
    return cls(**params)


def _finite_or_none(value):
    return float(value) if value is not None and math.isfinite(value) else None


def _jsonable(value):
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, (np.floating,)):
        return _jsonable(float(value))
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def attack_sample(model, criterion: Criterion, measure, attacks, x0, label, rng, keep_input=False):
    """Run ``attacks`` on one sample and return its report record."""
    record = {"label": int(label)}
    logits = model.predictions(x0)
    if criterion(logits, label):
        record.update(already_adversarial=True, rho=0.0, attacks=[])
        if keep_input:
            record["adversarial"] = np.asarray(x0).tolist()
        return record
    state = Adversarial(model, criterion, measure, x0, label, check_original=False)
    children = rng.spawn(len(attacks))
    results = []
    for (name, attack), child in zip(attacks, children):
        try:
            outcome = attack(state, child)
        except AttackError as exc:
            outcome = exc.outcome
            if outcome is None:
                results.append({"name": name, "success": False, "error": f"{type(exc).__name__}: {exc}"})
                continue
        except Exception as exc:  # one broken attack must not abort the benchmark
            results.append({"name": name, "success": False, "error": f"{type(exc).__name__}: {exc}"})
            continue
        results.append(
            {
                "name": name,
                "success": outcome.success,
                "distance": _finite_or_none(outcome.own_distance),
                "running_best": _finite_or_none(state.best_distance.value),
                "prediction_calls": outcome.prediction_calls,
                "gradient_calls": outcome.gradient_calls,
                "overrides": _jsonable(outcome.overrides),
                "tuned_parameters": _jsonable(outcome.tuned_parameters),
                "error": outcome.error,
                "wall_time": outcome.wall_time,
            }
        )
    own = [r["distance"] for r in results if r.get("distance") is not None]
    rho = min(own) if own else math.inf
    record.update(already_adversarial=False, rho=_finite_or_none(rho), attacks=results)
    if keep_input:
        record["adversarial"] = None if state.best_input is None else state.best_input.tolist()
    return record


def summarize(rhos) -> dict:
    """Robustness as the mean of the finite per-sample values."""
    finite = [r for r in rhos if r is not None and math.isfinite(r)]
    return {
        "robustness": float(np.mean(finite)) if finite else None,
        "num_samples": len(rhos),
        "num_finite": len(finite),
        "num_failed": len(rhos) - len(finite),
        "failed_samples_rule": "excluded from robustness mean",
    }


def run_benchmark(config: BenchmarkConfig, keep_inputs=False) -> dict:
    model = load_model(config.model_path)
    data = load_dataset(
        config.dataset_path, config.dataset_format, model.bounds, model.input_shape, config.labels_path
    )
    for i, y in enumerate(data.labels):
        if not 0 <= y < model.num_classes:
            raise ConfigError(f"sample {i}: label {y} invalid for a {model.num_classes}-class model")
    n = len(data) if config.sample_limit is None else min(len(data), config.sample_limit)
    criterion = criterion_from_config(config.criterion)
    measure = DistanceMeasure.parse(config.distance)
    attacks = [(s.name, build_attack(s, model, config.dataset_format)) for s in config.attacks]

    def work(i):
        return attack_sample(
            model, criterion, measure, attacks, data.inputs[i], data.labels[i],
            seeded_rng(config.global_seed, i), keep_inputs,
        )

    start = time.perf_counter()
    if config.parallelism == 1:
        records = [work(i) for i in range(n)]
    else:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            records = list(pool.map(work, range(n)))
    for i, rec in enumerate(records):
        rec["index"] = i

    summary = summarize([math.inf if r["rho"] is None else r["rho"] for r in records])
    summary["num_already_adversarial"] = sum(r["already_adversarial"] for r in records)
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "robustbench",
        "tool_version": __version__,
        "config": {
            "model": config.model_path,
            "samples": {
                "path": config.dataset_path,
                "format": config.dataset_format,
                "labels": config.labels_path,
                "count": n,
                "indices": list(range(n)),
            },
            "attacks": [
                {"name": name, "overrides": _jsonable(getattr(a, "overrides", {})),
                 "params": _jsonable(spec.params)}
                for (name, a), spec in zip(attacks, config.attacks)
            ],
            "criterion": criterion.to_dict(),
            "distance": measure.value,
            "seed": config.global_seed,
        },
        "samples": [_order_record(r) for r in records],
        "summary": summary,
        "wall_time": time.perf_counter() - start,
    }


def _order_record(rec):
    keys = ("index", "label", "already_adversarial", "rho", "attacks", "adversarial")
    return {k: rec[k] for k in keys if k in rec}


def emit_report(report, path) -> None:
    text = json.dumps(report, indent=2, allow_nan=False)
    Path(path).write_text(text + "\n")


def strip_wall_times(doc):
    """Copy of a report without timing fields, for reproducibility comparisons."""
    if isinstance(doc, dict):
        return {k: strip_wall_times(v) for k, v in doc.items() if k not in WALL_TIME_KEYS}
    if isinstance(doc, list):
        return [strip_wall_times(v) for v in doc]
    return doc


def recompute_robustness(report) -> float | None:
    """Robustness recomputed from the per-attack distances of a report."""
    rhos = []
    for rec in report["samples"]:
        if rec["already_adversarial"]:
            rhos.append(0.0)
            continue
        own = [a["distance"] for a in rec["attacks"] if a.get("distance") is not None]
        rhos.append(min(own) if own else math.inf)
    return summarize(rhos)["robustness"]


REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "tool_version", "config", "samples", "summary"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "tool_version": {"type": "string", "pattern": r"^\d+\.\d+\.\d+$"},
        "config": {
            "type": "object",
            "required": ["model", "samples", "attacks", "criterion", "distance", "seed"],
            "properties": {
                "samples": {
                    "type": "object",
                    "required": ["path", "format", "count", "indices"],
                },
                "attacks": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "object", "required": ["name", "overrides"]},
                },
                "criterion": {"type": "object", "required": ["name"]},
                "distance": {"enum": [m.value for m in DistanceMeasure]},
            },
        },
        "samples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "label", "already_adversarial", "rho", "attacks"],
                "properties": {
                    "rho": {"type": ["number", "null"], "minimum": 0},
                    "attacks": {
                        "type": "array",
                        "items": {"type": "object", "required": ["name", "success"]},
                    },
                },
            },
        },
        "summary": {
            "type": "object",
            "required": ["robustness", "num_samples", "num_finite", "num_failed"],
        },
    },
}


__all__ = [
    "AttackSpec",
    "BenchmarkConfig",
    "RobustBenchError",
    "config_from_dict",
    "load_config",
    "run_benchmark",
    "attack_sample",
    "emit_report",
    "summarize",
    "strip_wall_times",
    "recompute_robustness",
    "REPORT_SCHEMA",
]
