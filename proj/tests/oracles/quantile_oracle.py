"""Check-loss (Koenker-Bassett) median regression on the heteroskedastic fixture used by test_quantile.cpp."""
import os

import numpy as np
from scipy import optimize

DATA = os.path.join(os.path.dirname(__file__), "..", "data")

rng = np.random.default_rng(4242)
n = 200
x = rng.uniform(0.0, 4.0, n)
y = 1.0 + x + (0.5 + 0.5 * x) * rng.standard_normal(n)
with open(os.path.join(DATA, "quantile_n200.csv"), "w") as fh:
    fh.write("y,x\n")
    for a, b in zip(y, x):
        fh.write(f"{float(a)!r},{float(b)!r}\n")


def check_loss_fit(r):
    # min r 1'u + (1 - r) 1'v  s.t.  X b + u - v = y, u, v >= 0
    X = np.column_stack([np.ones(n), x])
    c = np.concatenate([np.zeros(2), r * np.ones(n), (1 - r) * np.ones(n)])
    A = np.hstack([X, np.eye(n), -np.eye(n)])
    bounds = [(None, None)] * 2 + [(0, None)] * (2 * n)
    res = optimize.linprog(c, A_eq=A, b_eq=y, bounds=bounds, method="highs")
    return res.x[:2]


print("median fit (intercept, slope)", repr(check_loss_fit(0.5).tolist()))
