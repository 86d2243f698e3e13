"""The command-line workflow, driven from Python.

Equivalent shell session::

    popgcn synth --preset sbm --seed 0 --out sbm
    popgcn baseline --config sbm/config.ini --data sbm
    popgcn run --config sbm/config.ini --data sbm --graph sbm/graph.csv --out report.json

The sbm preset ships its graph as an edge list, which ``run --graph`` uses
in place of a population graph.
"""

import json
import os
import tempfile

from popgcn.cli import main

work = tempfile.mkdtemp()
data = os.path.join(work, "sbm")
cfg = os.path.join(data, "config.ini")

main(["synth", "--preset", "sbm", "--seed", "0", "--out", data])
print(open(cfg).read())

main(["baseline", "--config", cfg, "--data", data, "--quiet", "--out", os.path.join(work, "ridge.json")])
code = main(["run", "--config", cfg, "--data", data, "--graph", os.path.join(data, "graph.csv"),
             "--out", os.path.join(work, "report.json"), "--quiet"])
print("exit code", code)

report = json.load(open(os.path.join(work, "report.json")))
print("gcn folds:", [round(r["accuracy"], 2) for r in report["arms"]["gcn"][:5]], "...")
