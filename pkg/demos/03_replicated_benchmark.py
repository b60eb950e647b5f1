"""A quick replicated train/test benchmark with reports written to demo_out/.

The full acceptance run uses R=100; R=10 here keeps the demo under a minute.

    python3 demos/03_replicated_benchmark.py
"""
from pathlib import Path

from bigtax.dataset import load_csv
from bigtax.evaluation import benchmark, parse_methods
from bigtax.report import render_report

DATA = Path(__file__).resolve().parents[1] / "data"
OUT = Path("demo_out")

datasets = {"pima": load_csv(DATA / "pima.csv", "class"), "crabs": load_csv(DATA / "crabs.csv", "sex")}
specs = parse_methods("lda_plain,lda,logistic,cart,knn,svm")


def progress(entry):
    s = entry.stats
    print(f"{entry.dataset:>6} {entry.method:<10} mean {s['mean']:.4f}  sd {s['sd']:.4f}")


report = benchmark(datasets, specs, R=10, seed=42, progress=progress)
OUT.mkdir(exist_ok=True)
for fmt, name in (("md", "summary.md"), ("svg", "summary.svg"), ("csv", "summary.csv")):
    (OUT / name).write_bytes(render_report(report, fmt, {"R": 10, "seed": 42}))
print()
print((OUT / "summary.md").read_text())
