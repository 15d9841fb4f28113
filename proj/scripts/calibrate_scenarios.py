"""Calibrates the generative intercepts of the bundled scenarios on the stand-in table.

Prints the intercept / treatment coefficients that hit the target marginals and the
population R^2 split (least-squares projection of X on Z) for the short-term scenario.
Population quantities use exact averaging over the table for the Y marginals and a
large bootstrap draw for the R^2 split.
"""
import numpy as np
import pandas as pd
from scipy.optimize import brentq
from scipy.special import expit

d = pd.read_csv("data/covariates_standin.csv")
z1, z2, z31, z32 = [d[c].values.astype(float) for c in ["z1", "z2", "z3_1", "z3_2"]]

# fixed-trigger SSR scenario
g0, g1 = -0.3, 0.6
px = expit(g0 + g1 * z1)
w2, w3, w4, w5 = 2.0, 0.3, 0.4, 0.2


def marg(lp_fn):
    return (px * expit(lp_fn(1)) + (1 - px) * expit(lp_fn(0))).mean()


w0 = brentq(lambda w: marg(lambda x: w + w2 * x + w4 * z1) - 0.47, -5, 5)
w1 = brentq(lambda w: marg(lambda x: w0 + w + w2 * x + w3 * x + w4 * z1 + w5 * z1) - 0.60, -5, 5)
print("ssr intercept", w0, "treatment", w1)
for c in [0, 0.5, 1, 1.5]:
    p1 = marg(lambda x: w0 + c * w1 + w2 * x + c * w3 * x + w4 * z1 + c * w5 * z1)
    p0 = marg(lambda x: w0 + w2 * x + w4 * z1)
    print(f"  c={c}: P1={p1:.4f} P0={p0:.4f}")

# short-term scenario
px = expit(-0.4 + 0.5 * z1 + 0.4 * z2 + 0.3 * z31 - 0.3 * z32)
b = dict(x=3.3, z1=0.75, z2=-0.4, z31=0.3, z32=0.55, z1z2=0.45, z1z31=-0.3, z1z32=0.4)
t = dict(ax=0.4, az1=0.2, az2=0.1, az31=0.0, az32=0.1, az1z2=0.2, az1z31=0.1, az1z32=0.2)


def zpart(a):
    s = (b["z1"] * z1 + b["z2"] * z2 + b["z31"] * z31 + b["z32"] * z32
         + b["z1z2"] * z1 * z2 + b["z1z31"] * z1 * z31 + b["z1z32"] * z1 * z32)
    if a:
        s = s + (t["az1"] * z1 + t["az2"] * z2 + t["az31"] * z31 + t["az32"] * z32
                 + t["az1z2"] * z1 * z2 + t["az1z31"] * z1 * z31 + t["az1z32"] * z1 * z32)
    return s


def lp(x, a, b0, ta):
    return b0 + (b["x"] + a * t["ax"]) * x + zpart(a) + a * ta


def m(a, b0, ta):
    return (px * expit(lp(1, a, b0, ta)) + (1 - px) * expit(lp(0, a, b0, ta))).mean()


b0 = brentq(lambda v: m(0, v, 0) - 0.49, -8, 8)
ta = brentq(lambda v: m(1, b0, v) - 0.60, -8, 8)
print("short-term intercept", b0, "treatment", ta, m(0, b0, 0), m(1, b0, ta))

rng = np.random.default_rng(1)
N = 200000
idx = rng.integers(0, len(z1), N)
X = (rng.uniform(size=N) < px[idx]).astype(float)
Z = np.column_stack([np.ones(N), z1[idx], z2[idx], z31[idx], z32[idx]])
Q = Z @ np.linalg.lstsq(Z, X, rcond=None)[0]
for a in (0, 1):
    lin = b0 + (b["x"] + a * t["ax"]) * X + zpart(a)[idx] + (a * ta)
    bx = b["x"] + a * t["ax"]
    V = np.var(lin)
    den = V + np.pi ** 2 / 4
    print(f"  arm {a}: R2={V / den:.3f} R2x={bx ** 2 * np.var(X - Q) / den:.3f} "
          f"R2z={np.var(lin - bx * (X - Q)) / den:.3f}")
