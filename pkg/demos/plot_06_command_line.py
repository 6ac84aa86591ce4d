"""
Running experiments from a config file
======================================

Every experiment can be driven by an INI file through ``python -m orbitglue``.
This script does the same from Python and prints the report.
"""

import pathlib
import tempfile

from orbitglue import cli

out = pathlib.Path(tempfile.mkdtemp())
cfg = out / "glue.cfg"
cfg.write_text("""
[system]
kind = markov
adjacency = full
size = 2

[family]
kind = cylinders
length = 2

[experiment]
name = glue
targets = 0; 1
weights = 1/2, 1/2
N = 8
sweep = 3
""")

code = cli.main(["glue", "--config", str(cfg), "--output-dir", str(out)])
print("exit code", code)
print((out / "glue.jsonl").read_text())
print((out / "glue.csv").read_text())
