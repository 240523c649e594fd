import json
import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"


def test_benchmark_runs_both_backends():
    proc = subprocess.run([sys.executable, str(BENCH), "--repeat", "1", "--json"],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    out = json.loads(proc.stdout)
    assert out["python"]["backend"] == "python"
    if out["cython"] is not None:
        assert out["cython"]["backend"] == "cython"
