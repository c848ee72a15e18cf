"""Drive the full file-based pipeline through the CLI.

synth writes a synthetic matrix plus an observation triplet file and the
ground-truth factors; estimate completes the similarity matrix from the
observations alone; eval scores the recovered factors against the truth.
Everything round-trips through the plain-text formats, so each stage can
be swapped for your own tooling.
"""

import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    print(f"$ {' '.join(args)}")
    proc = subprocess.run(args, capture_output=True, text=True)
    sys.stdout.write(proc.stdout)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(proc.returncode)


with tempfile.TemporaryDirectory() as tmp:
    data = Path(tmp) / "data.mat"
    est = Path(tmp) / "est"
    run("onesided", "synth", "--kind", "gaussian", "--m", "30000", "--d", "30",
        "--r", "3", "--k", "3", "--seed", "11", "--out", str(data))
    run("onesided", "estimate", "--in", f"{data}.obs", "--algorithm", "ours",
        "--r", "3", "--steps", "4000", "--seed", "12", "--out", str(est))
    run("onesided", "eval", "--qhat", f"{est}.q.mat", "--qtrue", f"{data}.qtrue.mat",
        "--lhat", f"{est}.lambda.mat", "--ltrue", f"{data}.ltrue.mat")
