"""Rebuild data/*.csv from public PyPI distributions that bundle the files.

    python scripts/prepare_data.py [--out data]

Sources (all redistributions of the public UCI / MASS files):

* musk_clean1.csv  <- ``mil`` wheel, mil/data/datasets/csv/musk1.csv (UCI Musk v1, "clean1")
* pima.csv         <- ``imbalanced_databases`` wheel, data/pima/pima.dat (UCI Pima, 768 rows)
* crabs.csv        <- ``pydataset`` sdist, resources/rdata/csv/MASS/crabs.csv
"""
import argparse
import csv
import glob
import io
import os
import subprocess
import sys
import tarfile
import tempfile
import zipfile


def _download(name, dest):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", name, "--no-deps", "-q", "-d", dest],
        check=True,
    )
    return glob.glob(os.path.join(dest, "*"))[0]


def _write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}: {len(rows)} rows x {len(header)} columns")


def musk(tmp, out):
    whl = _download("mil==1.0.5", os.path.join(tmp, "mil"))
    text = zipfile.ZipFile(whl).read("mil/data/datasets/csv/musk1.csv").decode()
    rows = []
    for line in text.splitlines():
        cells = line.split(",")
        # cells: class, molecule id, f1..f166
        rows.append(cells[2:] + ["musk" if cells[0] == "1" else "non-musk"])
    header = [f"f{j}" for j in range(1, 167)] + ["class"]
    _write(os.path.join(out, "musk_clean1.csv"), header, rows)


def pima(tmp, out):
    whl = _download("imbalanced_databases==0.1.1", os.path.join(tmp, "imb"))
    text = zipfile.ZipFile(whl).read("imbalanced_databases/data/pima/pima.dat").decode()
    rows = [l.strip().split(",") for l in text.splitlines() if l.strip() and not l.startswith("@")]
    header = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age", "class"]
    _write(os.path.join(out, "pima.csv"), header, rows)


def crabs(tmp, out):
    sdist = _download("pydataset==0.2.0", os.path.join(tmp, "pyd"))
    with tarfile.open(sdist) as outer:
        member = next(m for m in outer.getmembers() if m.name.endswith("resources.tar.gz"))
        inner = tarfile.open(fileobj=io.BytesIO(outer.extractfile(member).read()))
        raw = inner.extractfile("resources/rdata/csv/MASS/crabs.csv").read().decode()
    reader = csv.reader(io.StringIO(raw))
    next(reader)
    # class = sex; keep the five morphometric columns only (species dropped)
    rows = [[r[4], r[5], r[6], r[7], r[8], r[2]] for r in reader]
    _write(os.path.join(out, "crabs.csv"), ["FL", "RW", "CL", "CW", "BD", "sex"], rows)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        musk(tmp, args.out)
        pima(tmp, args.out)
        crabs(tmp, args.out)


if __name__ == "__main__":
    main()
