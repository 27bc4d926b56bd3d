"""End-to-end CSV workflow through the command-line surface.

Simulates a clustered table to CSV, then drives the same subcommands a
shell user would: fit, cv, and select. Every subcommand returns JSON on
stdout; exit codes are 0 (ok), 1 (numerical failure), 2 (usage/schema).
"""

import json
import tempfile
from contextlib import redirect_stdout
from io import StringIO
from pathlib import Path

from nicc.cli import main

workdir = Path(tempfile.mkdtemp(prefix="nicc-demo-"))
csv_path = workdir / "clustered.csv"

code = main([
    "simulate", "--family", "binomial", "--clusters", "30", "--cluster-size", "25",
    "--p", "4", "--rb", "5", "--phi", "0.4", "--seed", "13", "--out", str(csv_path),
])
assert code == 0

def run(argv):
    buf = StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, json.loads(buf.getvalue())

code, fit_report = run(["fit", str(csv_path), "--family", "binomial"])
print(f"fit: exit {code}, coefficients:")
for name, value in fit_report["coefficients"].items():
    print(f"  {name:>12} {value:+.3f}")
print("criteria:", {k: round(v["value"], 1) for k, v in fit_report["criteria"].items()})

code, cv_report = run([
    "cv", str(csv_path), "--family", "binomial", "--k", "10", "--seed", "1",
])
print(f"\ncv: exit {code}, 10-fold deviance {cv_report['total_deviance']:.1f} "
      f"over {len(cv_report['per_fold_deviance'])} folds")

code, sel_report = run([
    "select", str(csv_path), "--family", "binomial", "--criterion", "nicc", "--rule", "1se",
])
print(f"\nselect: exit {code}, NICc 1SE picks {sel_report['chosen_size']} of 4: "
      f"{sel_report['chosen_variables']}")
print("step values:", [round(s["value"], 1) for s in sel_report["path"]])
