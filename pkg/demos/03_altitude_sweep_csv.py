"""
A sweep through the command-line layer
======================================

The same machinery the ``compnoma run`` command uses: build a config,
evaluate an altitude sweep on both paths, and read the CSV back.
"""

import csv
import io
from collections import defaultdict

from compnoma.expcli import parse_config, run_experiment, to_csv

spec = parse_config("""
sweep_axis = h_u
sweep_values = 50, 75, 100, 150
metrics = assoc
iterations = 3000
master_seed = 3
""")
text = to_csv(run_experiment(spec))

table = defaultdict(dict)
for row in csv.DictReader(io.StringIO(text)):
    table[(row["case"], row["path"])][float(row["sweep_value"])] = float(row["value"])

# the two-LoS cooperative share grows with altitude as more BSs become visible
print("class      path      " + "  ".join(f"h={h:<5g}" for h in spec.sweep_values))
for (case, path), vals in sorted(table.items()):
    print(f"{case:10s} {path:9s} " + "  ".join(f"{vals[h]:7.4f}" for h in spec.sweep_values))
