"""Threshold sweeps and report comparison through the command-line pipeline.

Every subcommand is deterministic: identical inputs and flags produce
byte-identical reports, and reports carry a dataset fingerprint so deltas
are only ever computed between runs on the same data.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

workdir = Path(tempfile.mkdtemp(prefix="napdemo-"))


def naptron(*args):
    cmd = [sys.executable, "-m", "naptron", *map(str, args)]
    print("$ naptron", " ".join(map(str, args)))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        print(proc.stderr)
        raise SystemExit(proc.returncode)
    print(proc.stdout)
    return proc.stdout


naptron("generate", workdir / "data", "--seed", 31,
        "--classes", 4, "--train-per-class", 40,
        "--test-id", 80, "--test-ood", 80, "--fp", 30,
        "--rho-id", 0.05, "--rho-ood", 0.35)

naptron("build", workdir / "data" / "train", "--out", workdir / "store.naps")

naptron("eval", workdir / "data" / "test",
        "--store", workdir / "store.naps", "--method", "naptron-min",
        "--nms-threshold", 0.0, "--report", workdir / "rep-min")

# metrics across NMS score cutoffs; high cutoffs leave scarce data and
# undefined cells are flagged as empty rather than zeroed
naptron("sweep", workdir / "data" / "test",
        "--store", workdir / "store.naps", "--method", "naptron-min",
        "--thresholds", 0.0, 0.2, 0.4, 0.6, 0.8, 0.95)

naptron("eval", workdir / "data" / "test",
        "--store", workdir / "store.naps", "--method", "naptron-avg",
        "--nms-threshold", 0.0, "--report", workdir / "rep-avg")

# same dataset fingerprint, so the comparison is accepted
naptron("compare", workdir / "rep-min", workdir / "rep-avg")

print("report files:", sorted(p.name for p in (workdir / "rep-min").iterdir()))
