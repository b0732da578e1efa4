"""
Running the whole pipeline from a CSV
=====================================

Equivalent to

    metapool demos/data/quantiles.csv --signals demos/data/signals.csv --out demos/out -v
"""

import json
from pathlib import Path

from metapool.cli import main

here = Path(__file__).parent
out = here / "out"
status = main([str(here / "data" / "quantiles.csv"), "--signals", str(here / "data" / "signals.csv"),
               "--out", str(out), "-v"])
print("exit status", status)

for rec in json.loads((out / "results.json").read_text()):
    print(rec["measure"], rec["region"], rec["method"], rec["echo"], "reliability", rec["reliability"])
print(sorted(p.name for p in (out / "forest").iterdir()))
