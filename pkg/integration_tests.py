"""
Integration tests for Seasonal Aggregate.

This script exercises the command-line chain end to end:
- Simulation of an aggregated seasonal long-memory series
- Whittle fitting over the differencing cells, with asymptotic intervals
- Fisher information at the fitted parameters
- Forecasting with MSE bands
- Split-sample forecast comparison against a SARFIMA competitor
- Timestamp ingestion into a count series

REQUIREMENTS:
- Package installed: pip install -e .
- Optional SAGG_* settings in the environment or .env (see README)

USAGE:
    python integration_tests.py

OUTPUT:
    All files are written to a temporary directory which is listed at the end.
    Set KEEP_OUTPUT=1 to keep it for inspection.
"""

import os
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

# Optional test configuration from environment variables
TEST_N = int(os.getenv("TEST_N", "256"))  # Fitted sample size of the simulated series
KEEP_OUTPUT = os.getenv("KEEP_OUTPUT") == "1"

MODEL = ["--z", "[10]", "--d", "-0.1", "--D", "[0.3]"]


def test_section(title):
    """Print test section header."""
    print("\n" + "=" * 70)
    print(f"  {title}")
    print("=" * 70)


def test_result(test_name, ok, detail=None):
    """Print test result."""
    status = "✓" if ok else "✗"
    msg = f"{status} {test_name}"
    if detail:
        msg += f": {detail}"
    print(msg)
    if not ok:
        failures.append(test_name)
    return ok


def run(*args):
    """Run the CLI and return the completed process."""
    return subprocess.run(
        [sys.executable, "-m", "seasonal_aggregate", *args],
        capture_output=True,
        text=True,
    )


def read_kv(path):
    values = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line and not line.startswith("#") and "=" in line:
            key, value = line.split("=", 1)
            values[key] = value
    return values


def data_rows(path):
    return [line for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line and not line.startswith("#")]


failures = []
workdir = Path(tempfile.mkdtemp(prefix="seasonal-aggregate-"))

try:
    test_section("1. SIMULATION")

    series = workdir / "sim.txt"
    proc = run("--seed", "7", "-o", str(series), "simulate", *MODEL, "--m", "60", "--N", str(TEST_N))
    rows = data_rows(series) if series.exists() else []
    test_result("simulate writes a series", proc.returncode == 0 and len(rows) > TEST_N,
                f"{len(rows)} values" if rows else proc.stderr.strip())

    again = workdir / "sim2.txt"
    run("--seed", "7", "-o", str(again), "simulate", *MODEL, "--m", "60", "--N", str(TEST_N))
    test_result("simulation is reproducible for a fixed seed",
                again.exists() and series.read_text() == again.read_text())

    test_section("2. ESTIMATION")

    fitted = workdir / "fit.txt"
    proc = run("-o", str(fitted), "fit", "-i", str(series), "--z", "[10]")
    kv = read_kv(fitted) if fitted.exists() else {}
    test_result("fit selects differencing orders", proc.returncode == 0 and "r" in kv and "R.1" in kv,
                f"r={kv.get('r')} R.1={kv.get('R.1')}" if kv else proc.stderr.strip())
    test_result("fit reports estimates and AIC", "d" in kv and "D.1" in kv and "aic" in kv,
                f"d={kv.get('d')} D.1={kv.get('D.1')}")
    test_result("fit reports asymptotic intervals", "ci.D.1.lower" in kv and "ci.D.1.upper" in kv)

    test_section("3. FISHER INFORMATION")

    fisher = workdir / "fisher.txt"
    proc = run("-o", str(fisher), "fisher", *MODEL, "--N", str(TEST_N))
    kv = read_kv(fisher) if fisher.exists() else {}
    test_result("fisher reports Γ and standard errors", proc.returncode == 0 and "se.d" in kv and "se.D.1" in kv,
                f"se.d={kv.get('se.d')} se.D.1={kv.get('se.D.1')}" if kv else proc.stderr.strip())

    test_section("4. FORECASTING")

    forecast = workdir / "forecast.txt"
    proc = run("-o", str(forecast), "forecast", "-i", str(series), "--z", "[10]", "--h", "12")
    rows = data_rows(forecast) if forecast.exists() else []
    test_result("forecast writes 12 steps", proc.returncode == 0 and len(rows) == 13,
                rows[1] if len(rows) > 1 else proc.stderr.strip())

    compare = workdir / "compare.txt"
    proc = run("-o", str(compare), "compare", "-i", str(series), "--z", "[10]", "--train", "0.8", "--h", "10")
    rows = data_rows(compare) if compare.exists() else []
    test_result("compare writes an efficiency ratio curve", proc.returncode == 0 and len(rows) == 11,
                rows[-1] if rows else proc.stderr.strip())

    test_section("5. INGESTION AND ERRORS")

    stamps = workdir / "stamps.txt"
    stamps.write_text("\n".join(str(1_700_000_000 + 37 * i) for i in range(200)) + "\n", encoding="utf-8")
    counts = workdir / "counts.txt"
    proc = run("-o", str(counts), "ingest", "-i", str(stamps), "--window-seconds", "600")
    test_result("ingest writes counts and metadata",
                proc.returncode == 0 and counts.exists() and Path(f"{counts}.meta").exists(),
                proc.stdout.strip() or proc.stderr.strip())

    proc = run("fisher", "--z", "[10]", "--d", "0.4", "--D", "[0.3]")
    test_result("invalid parameters exit with code 2", proc.returncode == 2, proc.stderr.strip())

except Exception as e:
    print(f"\n✗ Unexpected failure: {e}")
    failures.append(str(e))

finally:
    test_section("SUMMARY")
    if failures:
        print(f"✗ {len(failures)} check(s) failed:")
        for name in failures:
            print(f"   - {name}")
    else:
        print("✓ All integration checks passed")

    if KEEP_OUTPUT:
        print(f"\nOutput kept in {workdir}")
    else:
        shutil.rmtree(workdir, ignore_errors=True)

sys.exit(1 if failures else 0)
