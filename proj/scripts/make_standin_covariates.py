"""Writes the synthetic 132-row baseline covariate table used by the bundled scenarios.

z1 is continuous and standardized (mean 0, population sd 1), z2 is binary and
z3 is a three-level factor encoded as the indicators z3_1 and z3_2.
"""
import csv
import sys

import numpy as np

rng = np.random.default_rng(20190417)
n = 132
z1 = rng.normal(size=n)
z1 = (z1 - z1.mean()) / z1.std()
z2 = (rng.uniform(size=n) < 0.45).astype(int)
z3 = rng.choice(3, size=n, p=[0.40, 0.35, 0.25])

out = sys.argv[1] if len(sys.argv) > 1 else "data/covariates_standin.csv"
with open(out, "w", newline="") as fh:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["id", "z1", "z2", "z3_1", "z3_2"])
    for i in range(n):
        w.writerow([f"P{i + 1:03d}", f"{z1[i]:.6f}", z2[i], int(z3[i] == 1), int(z3[i] == 2)])
