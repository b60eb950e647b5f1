"""Where do the benchmark datasets sit in the n/p taxonomy, and what does that suggest?

    python3 demos/01_taxonomy_and_preprocessing.py
"""
from pathlib import Path

import numpy as np

from bigtax.dataset import fit_transform, load_csv, missing_summary
from bigtax.taxonomy import classify_dims, is_heterogeneous, recommend

DATA = Path(__file__).resolve().parents[1] / "data"

for name, label in (("pima", "class"), ("crabs", "sex"), ("musk_clean1", "class")):
    ds = load_csv(DATA / f"{name}.csv", label)
    report = classify_dims(ds.n, ds.p)
    rec = recommend(report, is_heterogeneous(ds.schema), missing_summary(ds).total > 0)
    print(f"{name}: {report}")
    for tag in rec.tags:
        print(f"    {tag}: {rec.rationale[tag]}")

# The two standardization readings differ only by a factor sqrt(n - 1) per column.
ds = load_csv(DATA / "crabs.csv", "sex")
by_norm, _ = fit_transform(ds, "standardize", scale_mode="norm")
by_sd, _ = fit_transform(ds, "standardize", scale_mode="sd")
print("\ncolumn norms after norm scaling:", np.round(np.linalg.norm(by_norm.values, axis=0), 6))
print("sample sd after sd scaling:     ", np.round(by_sd.values.std(axis=0, ddof=1), 6))
