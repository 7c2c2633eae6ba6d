#!/usr/bin/env python3
"""Smoke test of the varlatent_py extension module.

Builds the cdylib with cargo if needed, loads it, and exercises the main
entry points on small inputs.

Usage: python3 python/smoke_test.py [--release]
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def build_and_import(release: bool):
    profile = "release" if release else "debug"
    cmd = ["cargo", "build", "-p", "varlatent-py"]
    if release:
        cmd.append("--release")
    subprocess.run(cmd, cwd=REPO, check=True)
    lib = REPO / "target" / profile / "libvarlatent_py.so"
    if not lib.exists():  # macOS fallback
        lib = REPO / "target" / profile / "libvarlatent_py.dylib"
    stage = Path(tempfile.mkdtemp(prefix="varlatent_py_"))
    shutil.copy(lib, stage / "varlatent_py.so")
    sys.path.insert(0, str(stage))
    import varlatent_py

    return varlatent_py


def main():
    vl = build_and_import("--release" in sys.argv[1:])

    # dataset generators are deterministic under seed
    syn = vl.generate_synthetic(seed=7)
    assert syn.nrows == 250 and syn.ncols == 65, (syn.nrows, syn.ncols)
    again = vl.generate_synthetic(seed=7)
    assert syn.values == again.values
    rates = vl.generate_rates(seed=7)
    assert rates.nrows == 1690 and rates.ncols == 29

    # table construction and CSV round trip
    t = vl.DataTable(["a", "b", "c"], [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]])
    with tempfile.TemporaryDirectory() as td:
        path = str(Path(td) / "t.csv")
        t.to_csv(path)
        back = vl.DataTable.from_csv(path)
        assert back.variable_names == ["a", "b", "c"]
        assert back.values == t.values

    # univariate statistics
    stats = vl.univariate_stats([0.0, 1.0])
    assert abs(stats["mean"] - 0.5) < 1e-12
    assert abs(stats["std"] - 0.5) < 1e-12

    # pairwise metrics
    m = vl.metric_matrix(t, "pearson")
    assert abs(m.values[0][0] - 1.0) < 1e-12
    assert abs(m.values[0][1] - m.values[1][0]) < 1e-12
    report = vl.metric_comparison_report(t)
    assert report.nrows == 3  # 3 choose 2
    assert "pearson" in report.variable_names

    # cross product arithmetic (signed)
    cp = vl.cross_product((0.339, -0.177), (-0.019, 0.306))
    assert abs(cp - 0.100) < 5e-4, cp

    # a tiny end-to-end pipeline run
    small = vl.DataTable(
        [f"v{j}" for j in range(4)],
        [
            [math.sin(0.3 * i + j) + 0.01 * i * j for j in range(4)]
            for i in range(25)
        ],
    )
    spec = json.dumps(
        {
            "flow": "adjacency",
            "metric": "spearman_r2",
            "seed": 1,
            "runs": 1,
            "train_factor": 4,
            "monitor_factor": 0,
        }
    )
    train = json.dumps({"epochs": 3, "batch_size": 32, "runs": 1, "seed": 1})
    out = vl.represent_variables(small, spec, train)
    assert out["keys"] == ["v0", "v1", "v2", "v3"]
    assert len(out["lp"]) == 4
    for x, y in out["lp"]:
        assert math.hypot(x, y) < 1.0
    runs = json.loads(out["report"])
    assert len(runs["runs"]) == 1

    obs = vl.represent_observations(small, train)
    assert len(obs["lu"]) == 25

    print("smoke test passed")


if __name__ == "__main__":
    main()
