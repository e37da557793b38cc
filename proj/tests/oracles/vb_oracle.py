"""Exact log marginal likelihood of the spike-and-slab model for test_vb.cpp.

beta_j ~ N(0, 10), gamma_j ~ Bernoulli(0.5), sigma^2 ~ InvGamma(0.01, 0.01); data used raw.
"""
import itertools
import os

import numpy as np
from scipy import integrate, special, stats

DATA = os.path.join(os.path.dirname(__file__), "..", "data")
D, PI0, A0, B0 = 10.0, 0.5, 0.01, 0.01


def write_csv(name, X, y):
    cols = [f"x{j + 1}" for j in range(X.shape[1])]
    with open(os.path.join(DATA, name), "w") as fh:
        fh.write(",".join(["y"] + cols) + "\n")
        for i in range(len(y)):
            fh.write(",".join(repr(float(v)) for v in [y[i], *X[i]]) + "\n")


def read_csv(name):
    M = np.loadtxt(os.path.join(DATA, name), delimiter=",", skiprows=1)
    return M[:, 1:], M[:, 0]


def log_evidence(X, y):
    n, p = X.shape
    out = []
    for g in itertools.product([0, 1], repeat=p):
        Xg = X[:, [j for j in range(p) if g[j]]]

        def logf(t):
            s2 = np.exp(t)
            C = s2 * np.eye(n) + D * Xg @ Xg.T
            lp = A0 * np.log(B0) - special.gammaln(A0) - A0 * t - B0 / s2  # InvGamma density times ds2/dt
            return stats.multivariate_normal.logpdf(y, mean=np.zeros(n), cov=C) + lp

        grid = np.linspace(-10, 10, 2001)
        vals = np.array([logf(t) for t in grid])
        mode = grid[vals.argmax()]
        shift = vals.max()
        val, _ = integrate.quad(lambda t: np.exp(logf(t) - shift), mode - 15, mode + 15,
                                points=[mode], epsabs=0, epsrel=1e-12, limit=400)
        out.append(shift + np.log(val) + sum(g) * np.log(PI0) + (p - sum(g)) * np.log(1 - PI0))
    return special.logsumexp(out)


rng = np.random.default_rng(515)
n = 40
x = rng.standard_normal((n, 1))
y = 0.6 * x[:, 0] + 0.8 * rng.standard_normal(n)
write_csv("vb_p1.csv", x, y)
print("vb_p1 log p(y)", repr(float(log_evidence(x, y))))

X, y = read_csv("km_p3.csv")
print("km_p3 log p(y)", repr(float(log_evidence(X, y))))
