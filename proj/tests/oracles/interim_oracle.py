"""Independent reference computation of an interim report.

Fits every working model by direct maximization of the Bernoulli
quasi-log-likelihood (scipy BFGS, then Newton polishing) instead of IRLS, and
evaluates the estimator, its variance, the information fractions, conditional
power, the futility threshold and the sample size reassessment from their
closed forms. Writes the golden values consumed by test_cli_golden.

usage: python3 interim_oracle.py DATA.csv N_PER_ARM "x,z,w" "z,w" OUT.json
"""
import csv
import json
import math
import sys

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm

ALPHA, BETA, CAP_MULT = 0.025, 0.10, 2.0


def read(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for r in rows:
        rec = {k: (None if v in ("", "NA") else float(v)) for k, v in r.items() if k != "id"}
        rec["id"] = r["id"]
        out.append(rec)
    return out


def fit(rows, cols, resp):
    """Fallback ladder: full model, then drop trailing terms, then intercept only."""
    ladder = [cols[:k] for k in range(len(cols), 0, -1)]
    for cand in ladder:
        if len(rows) < len(cand) + 1 + 5:
            continue
        X = np.array([[1.0] + [r[c] for c in cand] for r in rows])
        y = np.array(resp)

        def nll(b):
            eta = X @ b
            return -(y * eta - np.logaddexp(0, eta)).sum()

        def grad(b):
            return -X.T @ (y - 1 / (1 + np.exp(-(X @ b))))

        b = minimize(nll, np.zeros(X.shape[1]), jac=grad, method="BFGS", options={"gtol": 1e-12}).x
        for _ in range(20):
            p = 1 / (1 + np.exp(-(X @ b)))
            b = b + np.linalg.solve(X.T @ (X * (p * (1 - p))[:, None]), X.T @ (y - p))
        if np.all(np.isfinite(b)) and np.max(np.abs(b)) < 30:
            return ("glm", cand, b)
    return ("mean", [], float(np.mean(resp)))


def predict(model, rows):
    kind, cols, b = model
    if kind == "mean":
        return [b] * len(rows)
    X = np.array([[1.0] + [r[c] for c in cols] for r in rows])
    return list(1 / (1 + np.exp(-(X @ b))))


def arm_mean(rows, hcols, fcols, has_x):
    c1 = [r for r in rows if r["y"] is not None]
    c2 = [r for r in rows if r["y"] is None and r["x"] is not None]
    c3 = [r for r in rows if r["x"] is None]
    yhat, yhat2 = {}, {}
    if has_x and c2:
        h = fit(c1, hcols, [r["y"] for r in c1])
        for r, v in zip(c1 + c2, predict(h, c1 + c2)):
            yhat[r["id"]] = v
    else:
        for r in c1:
            yhat[r["id"]] = r["y"]
    ystar = [r["y"] if r["y"] is not None else yhat[r["id"]] for r in c1 + c2]
    if c3:
        f = fit(c1 + c2, fcols, ystar)
        for r, v in zip(c1 + c2 + c3, predict(f, c1 + c2 + c3)):
            yhat2[r["id"]] = v
    else:
        for r, v in zip(c1 + c2, ystar):
            yhat2[r["id"]] = v
    mu = (sum(ystar) + sum(yhat2[r["id"]] for r in c3)) / (len(c1) + len(c2) + len(c3))
    return mu, yhat, yhat2


def bracket(r, mu, yhat, yhat2, pix, piy):
    v = yhat2[r["id"]] - mu
    if r["x"] is not None:
        v += (yhat[r["id"]] - yhat2[r["id"]]) / pix
    if r["y"] is not None:
        v += (r["y"] - yhat[r["id"]]) / (piy * pix)
    return v


def cp(z, t, theta):
    return norm.sf((norm.ppf(1 - ALPHA) - z * math.sqrt(t) - theta * (1 - t)) / math.sqrt(1 - t))


def main(path, n_per_arm, hcols, fcols, out):
    rows = read(path)
    has_x = "x" in rows[0]
    if not has_x:
        for r in rows:
            r["x"] = r["y"]
    n = len(rows)
    n_planned = 2 * n_per_arm
    nx = sum(r["x"] is not None for r in rows)
    ny = sum(r["y"] is not None for r in rows)
    pi, pix, piy = sum(r["arm"] == 1 for r in rows) / n, nx / n, ny / nx

    est = {}
    for a in (1, 0):
        est[a] = arm_mean([r for r in rows if r["arm"] == a], hcols, fcols, has_x)
    infl = []
    for r in rows:
        mu, yh, yh2 = est[int(r["arm"])]
        b = bracket(r, mu, yh, yh2, pix, piy)
        infl.append(b / pi if r["arm"] == 1 else -b / (1 - pi))
    s2 = np.var(infl, ddof=1) / n
    diff = est[1][0] - est[0][0]

    c1 = [r for r in rows if r["y"] is not None]
    m1 = np.mean([r["y"] for r in c1 if r["arm"] == 1])
    m0 = np.mean([r["y"] for r in c1 if r["arm"] == 0])
    fv = np.var([(r["y"] - m1) / pi if r["arm"] == 1 else -(r["y"] - m0) / (1 - pi) for r in c1], ddof=1) / n_planned
    t = min(1.0, fv / s2)

    mubar = np.mean([r["y"] for r in c1])
    num = np.mean([(r["y"] - mubar) ** 2 for r in c1]) / n_planned
    mu_p, yh_p, yh2_p = arm_mean(rows, hcols, fcols, has_x)
    den = np.mean([(bracket(r, mu_p, yh_p, yh2_p, pix, piy) + mu_p - mubar) ** 2 for r in rows]) / n
    t_blind = num / den

    z = diff / math.sqrt(s2)
    tc = min(t, 1 - 1e-9)
    theta = norm.ppf(1 - ALPHA) + norm.ppf(1 - BETA)
    spent = 2 * norm.sf(norm.ppf(1 - BETA / 2) / math.sqrt(tc))
    zb = theta * math.sqrt(tc) + norm.ppf(spent)
    gamma = cp(zb, tc, theta)
    cpd = cp(z, tc, theta)

    k = (norm.ppf(1 - ALPHA) - z * math.sqrt(tc)) / math.sqrt(1 - tc) - norm.ppf(BETA)
    second = max(0.0, k) ** 2 * n_planned / theta**2
    target = max(n, second + tc * n_planned, n_planned)
    cap = int(CAP_MULT * n_planned)
    n_new = min(cap, 2 * math.ceil(target / 2 - 1e-12))

    res = {
        "n_prime": n,
        "pi_hat": pi,
        "pi_x_hat": pix,
        "pi_y_hat": piy,
        "mu1": est[1][0],
        "mu0": est[0][0],
        "diff": diff,
        "s2": s2,
        "final_variance": fv,
        "t_unblinded": t,
        "t_blinded": t_blind,
        "Z_t": z,
        "B_t": z * math.sqrt(t),
        "cp_design": cpd,
        "cp_observed": cp(z, tc, z / math.sqrt(tc)),
        "futility_threshold": gamma,
        "decision": "stop_futility" if cpd < gamma else "continue",
        "ssr_n_second_stage": second,
        "ssr_n_new": n_new,
    }
    with open(out, "w") as fh:
        json.dump(res, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    p, n_arm, h, f, o = sys.argv[1:]
    main(p, int(n_arm), h.split(","), [c for c in f.split(",") if c], o)
