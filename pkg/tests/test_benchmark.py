import subprocess
import sys
from pathlib import Path

BENCH = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_sqa.py"


def test_benchmark_script_runs_and_reports_identity():
    out = subprocess.run([sys.executable, str(BENCH), "--reads", "4", "--sweeps", "5", "--repeat", "1"],
                         capture_output=True, text=True, check=True).stdout
    assert "numpy fallback" in out
    if "not built" not in out:
        assert "bit-identical  : True" in out
