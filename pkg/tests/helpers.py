"""Shared test utilities: dataset builders and independent numerical oracles."""

import numpy as np

from nicc import Dataset

LOG_2PI = float(np.log(2.0 * np.pi))


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def random_dataset(rng, family, n=40, n_pred=2, n_clusters=6, coef_scale=0.8, noise_sd=1.2,
                   singleton_clusters=False):
    """Small well-behaved dataset with genuine cluster structure."""
    X = rng.standard_normal((n, n_pred))
    theta = rng.normal(0.0, coef_scale, n_pred + 1)
    eta = theta[0] + X @ theta[1:]
    if singleton_clusters:
        clusters = np.arange(n)
    else:
        clusters = rng.integers(0, n_clusters, size=n)
    if family == "gaussian":
        y = eta + rng.normal(0.0, noise_sd, n)
    else:
        y = (rng.random(n) < sigmoid(eta)).astype(float)
        # keep both classes present so the MLE is interior
        if y.min() == y.max():
            y[:2] = np.array([0.0, 1.0])
    return Dataset.with_intercept(X, y, clusters, family)


def per_obs_loglik_fn(family, x_row, y_i, dispersion):
    """One observation's log-likelihood as a function of theta.

    The gaussian dispersion stays fixed at the fitted value: scores and
    information are taken with respect to the mean coefficients only.
    """
    x_row = np.asarray(x_row, dtype=float)

    def f(theta):
        eta = float(x_row @ theta)
        if family == "gaussian":
            return -0.5 * (LOG_2PI + np.log(dispersion) + (y_i - eta) ** 2 / dispersion)
        return y_i * eta - np.logaddexp(0.0, eta)

    return f


def total_loglik_fn(family, A, y, dispersion):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)

    def f(theta):
        eta = A @ theta
        if family == "gaussian":
            return float(np.sum(-0.5 * (LOG_2PI + np.log(dispersion) + (y - eta) ** 2 / dispersion)))
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    return f


def fd_gradient(f, theta, h=1e-6):
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = h
        grad[j] = (f(theta + e) - f(theta - e)) / (2.0 * h)
    return grad


def fd_hessian(f, theta, h=1e-4):
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    H = np.empty((p, p))
    for a in range(p):
        for b in range(p):
            ea = np.zeros(p)
            eb = np.zeros(p)
            ea[a] = h
            eb[b] = h
            H[a, b] = (
                f(theta + ea + eb) - f(theta + ea - eb) - f(theta - ea + eb) + f(theta - ea - eb)
            ) / (4.0 * h * h)
    return H
