"""Quadrature values of the conjugate marginal likelihood and DIC for test_evidence.cpp and acceptance.cpp.

Prior: beta | sigma^2 ~ N(0, sigma^2 D), sigma^2 ~ InvGamma(v0/2, s0/2).
"""
import os

import numpy as np
from scipy import integrate, optimize, special, stats

DATA = os.path.join(os.path.dirname(__file__), "..", "data")


def write_csv(name, X, y):
    cols = [f"x{j + 1}" for j in range(X.shape[1])]
    with open(os.path.join(DATA, name), "w") as fh:
        fh.write(",".join(["y"] + cols) + "\n")
        for i in range(len(y)):
            fh.write(",".join(repr(float(v)) for v in [y[i], *X[i]]) + "\n")


def log_joint_p1(b, t, X, y, D, v0, s0):
    """log p(y | b, s2) p(b | s2) p(s2) s2 with s2 = exp(t)."""
    n = len(y)
    s2 = np.exp(t)
    ll = stats.norm.logpdf(y, loc=X[:, 0] * b, scale=np.sqrt(s2)).sum()
    lb = stats.norm.logpdf(b, scale=np.sqrt(s2 * D[0, 0]))
    ls = stats.invgamma.logpdf(s2, v0 / 2, scale=s0 / 2) + t
    return ll + lb + ls


def evidence_p1(X, y, D, v0, s0):
    f = lambda z: -log_joint_p1(z[0], z[1], X, y, D, v0, s0)
    m = optimize.minimize(f, [0.0, 0.0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    shift = -m.fun
    b0, t0 = m.x
    val, _ = integrate.dblquad(lambda t, b: np.exp(log_joint_p1(b, t, X, y, D, v0, s0) - shift),
                               b0 - 12, b0 + 12, t0 - 12, t0 + 12, epsabs=0, epsrel=1e-11)
    return shift + np.log(val)


def log_beta_marginal_joint(b, X, y, D, v0, s0):
    """log of p(y | b, s2) p(b | s2) p(s2) integrated over s2 in closed form."""
    n, p = X.shape
    r = y - X @ b
    q = r @ r + b @ np.linalg.solve(D, b)
    a = (v0 + n + p) / 2
    const = -(n + p) / 2 * np.log(2 * np.pi) - 0.5 * np.linalg.slogdet(D)[1] + v0 / 2 * np.log(s0 / 2) - special.gammaln(v0 / 2)
    return const + special.gammaln(a) - a * np.log((s0 + q) / 2)


def evidence_p2(X, y, D, v0, s0):
    f = lambda b: -log_beta_marginal_joint(b, X, y, D, v0, s0)
    m = optimize.minimize(f, np.zeros(2), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
    shift = -m.fun
    c = m.x
    val, _ = integrate.dblquad(lambda b2, b1: np.exp(log_beta_marginal_joint(np.array([b1, b2]), X, y, D, v0, s0) - shift),
                               c[0] - 8, c[0] + 8, c[1] - 8, c[1] + 8, epsabs=0, epsrel=1e-11)
    return shift + np.log(val)


fixtures = []
fixtures.append(("inline", np.ones((3, 1)), np.array([1.0, 0.0, -1.0]), np.eye(1), 1.0, 1.0))
rng = np.random.default_rng(8080)
X = rng.standard_normal((20, 1)); y = 0.7 * X[:, 0] + rng.standard_normal(20)
fixtures.append(("evidence_f2.csv", X, y, np.array([[2.0]]), 3.0, 2.0))
X = rng.standard_normal((50, 1)); y = -0.4 * X[:, 0] + 1.3 * rng.standard_normal(50)
fixtures.append(("evidence_f3.csv", X, y, np.array([[10.0]]), 1.0, 0.5))
X = rng.standard_normal((15, 2)); y = X @ np.array([1.0, -0.5]) + rng.standard_normal(15)
fixtures.append(("evidence_f4.csv", X, y, np.diag([1.0, 4.0]), 2.0, 1.0))
X = rng.standard_normal((40, 2)); y = X @ np.array([0.3, 0.2]) + 0.8 * rng.standard_normal(40)
fixtures.append(("evidence_f5.csv", X, y, np.array([[2.0, 0.5], [0.5, 1.0]]), 4.0, 3.0))

for name, X, y, D, v0, s0 in fixtures:
    if name != "inline":
        write_csv(name, X, y)
    val = evidence_p1(X, y, D, v0, s0) if X.shape[1] == 1 else evidence_p2(X, y, D, v0, s0)
    print(name, "log p(y)", repr(float(val)))

# DIC on evidence_f3 with the posterior-mean plug-in, expectations by quadrature.
_, X, y, D, v0, s0 = fixtures[2]
f = lambda z: -log_joint_p1(z[0], z[1], X, y, D, v0, s0)
m = optimize.minimize(f, [0.0, 0.0], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
shift, (b0, t0) = -m.fun, m.x
post = lambda t, b: np.exp(log_joint_p1(b, t, X, y, D, v0, s0) - shift)
loglik = lambda b, s2: stats.norm.logpdf(y, loc=X[:, 0] * b, scale=np.sqrt(s2)).sum()
box = (b0 - 3, b0 + 3, t0 - 4, t0 + 4)
opts = dict(epsabs=0, epsrel=1e-10)
Z = integrate.dblquad(post, *box, **opts)[0]
Eb = integrate.dblquad(lambda t, b: b * post(t, b), *box, **opts)[0] / Z
Es2 = integrate.dblquad(lambda t, b: np.exp(t) * post(t, b), *box, **opts)[0] / Z
Ell = integrate.dblquad(lambda t, b: loglik(b, np.exp(t)) * post(t, b), *box, **opts)[0] / Z
print("f3 posterior mean beta", repr(float(Eb)), "sigma2", repr(float(Es2)))
print("f3 DIC", repr(float(-4 * Ell + 2 * loglik(Eb, Es2))))
