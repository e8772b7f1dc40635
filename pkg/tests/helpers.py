"""Shared test utilities: random valid states and an independent model oracle."""

import numpy as np

from sphereflock import Ensemble


def random_unit(rng, n=1):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_ensemble(rng, n, speed=1.0):
    """Uniform positions, tangent-projected normal velocities."""
    X = random_unit(rng, n)
    V = speed * rng.standard_normal((n, 3))
    V -= (X * V).sum(axis=1, keepdims=True) * X
    return Ensemble(X, V)


def transport_oracle(xk, xi, v):
    """Literal four-term transport formula, independent of the library path."""
    d = float(xk @ xi)
    rot = d * np.eye(3) + np.outer(xi, xk) - np.outer(xk, xi)
    c = np.cross(xk, xi)
    nsq = float(c @ c)
    if nsq > 0.0:
        rot = rot + ((1.0 - d) / nsq) * np.outer(c, c)
    return rot @ v


def rhs_oracle(ensemble, params):
    """Direct per-agent transcription of the model equations.

    Deliberately naive (explicit loops, per-pair transport via the formula
    above) so it shares no code with the production right-hand side.
    """
    X, V = ensemble.positions, ensemble.velocities
    n = ensemble.n
    dV = np.zeros_like(V)
    for i in range(n):
        xi, vi = X[i], V[i]
        acc = -(vi @ vi) / (xi @ xi) * xi
        for k in range(n):
            r = np.linalg.norm(xi - X[k])
            psi = float(params.kernel.psi(min(r, 2.0)))
            if k == i:
                moved = V[k]  # coincident-limit convention: identity transport
            else:
                moved = transport_oracle(X[k], xi, V[k])
            acc = acc + (psi / n) * (moved - vi)
            acc = acc + (params.sigma / n) * (X[k] - (xi @ X[k]) * xi)
        dV[i] = acc
    return V.copy(), dV
