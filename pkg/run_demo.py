#!/usr/bin/env python3
"""
Spectral Limit Laboratory Quick Start
Runs the reference experiments through the lab CLI and lints the reports
"""

import subprocess
import sys
import os

OUT_DIR = "reports"

EXPERIMENTS = [
    ("Cantor coefficients along powers of 3", ["fourier", "--model", "data/cantor.json",
                                               "--seq", '{"form": "powers", "base": 3, "length": 8}',
                                               "--format", "csv"]),
    ("Splitting of Lebesgue ⊕ shift", ["classify", "--model", "data/lebesgue_shift.json", "--format", "csv"]),
    ("Singular component ⊕ shift pipeline", ["example56", "--scan-windows", "4", "4", "--format", "csv"]),
    ("Synthetic mismatch fixture", ["example56", "--model", "data/mismatch.json"]),
    ("Finite oracle on rotation ⊕ contraction", ["oracle", "--model", "data/rotation_contraction.json"]),
    ("Resolvent two ways on Cantor", ["resolvent", "--model", "data/cantor.json", "--tol", "1e-6"]),
]

STATUS = {0: "✅", 2: "❔"}


def run(args):
    return subprocess.run([sys.executable, "-m", "app.main", *args]).returncode


def main():
    print("🔬 Starting Spectral Limit Laboratory")
    print("=" * 40)

    # Check if we're in the right directory
    if not os.path.exists("app/main.py"):
        print("❌ Error: Please run this script from the project root directory")
        sys.exit(1)

    failed = False
    try:
        for description, args in EXPERIMENTS:
            # example56 with a mismatch model overwrites the first example56 report, so it goes elsewhere
            out = os.path.join(OUT_DIR, "mismatch") if "data/mismatch.json" in args else OUT_DIR
            code = run([*args, "--out", out])
            print(f"{STATUS.get(code, '❌')} {description} (exit {code})")
            failed = failed or code == 1

        print("=" * 40)
        print("🧹 Linting reports...")
        code = run(["lint", "--out", OUT_DIR])
        failed = failed or code != 0
    except KeyboardInterrupt:
        print("\n🛑 Stopped")
        sys.exit(1)
    except Exception as e:
        print(f"❌ Error: {e}")
        print("💡 Make sure you've installed requirements: pip install -r requirements.txt")
        sys.exit(1)

    print(f"📂 Reports written to {OUT_DIR}/")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
