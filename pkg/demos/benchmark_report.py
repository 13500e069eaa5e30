"""
A reproducible benchmark run
============================

Write a small network and dataset to disk, describe the run in a JSON config
and get back a report with per-sample minimal perturbations and the mean
robustness. Two runs with the same seed agree exactly.
"""
import json
import tempfile
from pathlib import Path

import numpy as np

from robustbench.benchmark import load_config, run_benchmark, strip_wall_times
from robustbench.datasets import write_csv
from robustbench.models import save_model
from robustbench.toys import balanced_mlp

work = Path(tempfile.mkdtemp())
net = balanced_mlp(np.random.default_rng(1), (2, 10, 3))
save_model(net, work / "model.json")

xs = np.random.default_rng(2).uniform(0.05, 0.95, size=(6, 2))
write_csv(work / "data.csv", xs, [int(np.argmax(net.predictions(x))) for x in xs], header=True)

config = {
    "model": "model.json",
    "dataset": {"path": "data.csv", "format": "csv"},
    "attacks": [{"name": "fgsm", "params": {"grid_size": 50}}, "deepfool_l2",
                {"name": "boundary", "params": {"boundary_iterations": 500}}],
    "criterion": "misclassification",
    "distance": "mse",
    "seed": 0,
}
(work / "config.json").write_text(json.dumps(config, indent=2))

cfg = load_config(work / "config.json")
report = run_benchmark(cfg)
for rec in report["samples"]:
    per_attack = {a["name"]: a.get("distance") for a in rec["attacks"]}
    print(rec["index"], "rho =", rec["rho"], per_attack)
print("robustness:", report["summary"]["robustness"])

cfg.parallelism = 4
again = run_benchmark(cfg)
print("identical with 4 workers:", strip_wall_times(again) == strip_wall_times(report))

# the same run from the shell:
#   robustbench run --config <dir>/config.json --output report.json
print("workspace:", work)
