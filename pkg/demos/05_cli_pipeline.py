"""Drive the whole pipeline through the command-line interface.

Generates a small synthetic corpus, featurizes it, trains and evaluates a
forest, ranks features, scans and clusters the fixture scripts, and folds
everything into the final report. Every artifact lands in one directory
and two runs with the same seed produce identical bytes.
"""

import tempfile
from pathlib import Path

from abdscope.cli import main

SCRIPTS = Path(__file__).parent.parent / "tests" / "fixtures" / "scripts"

with tempfile.TemporaryDirectory() as tmp:
    out = str(Path(tmp) / "run")
    steps = [
        ["synth", "--out", out, "--seed", "7", "--positives", "40", "--negatives", "160"],
        ["featurize", "--in", out, "--labels", f"{out}/labels.csv", "--out", out],
        ["train", "--in", f"{out}/dataset.csv", "--model", "forest", "--seed", "7", "--trees", "25", "--out", out],
        ["eval", "--in", f"{out}/dataset.csv", "--model", "forest", "--seed", "7", "--trees", "25", "--out", out],
        ["predict", "--in", f"{out}/dataset.csv", "--model-file", f"{out}/model.json", "--out", out],
        ["rank", "--in", f"{out}/dataset.csv", "--out", out],
        ["scan", "--in", str(SCRIPTS), "--out", out],
        ["cluster", "--in", str(SCRIPTS), "--out", out],
        ["report", "--in", out, "--out", out],
    ]
    for argv in steps:
        print(f"$ abdscope {' '.join(argv)}")
        code = main(argv)
        assert code == 0, f"exit {code}"
        print()
