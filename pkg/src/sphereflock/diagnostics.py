"""Energy, dissipation, diameters, alignment metrics, and rate fitting.

The energy of a state is E = E_K + E_C with

    E_K = (1/N) sum_k |v_k|^2,
    E_C = (sigma / 2 N^2) sum_{k,l} |x_k - x_l|^2,

and along exact solutions it dissipates as

    dE/dt = - sum_{i,j} (psi_ij / N^2) |R_{x_j -> x_i} v_j - v_i|^2.

That identity is algebraic in the right-hand side, so the residual
computed here (chain-rule dE/dt plus the dissipation sum) is a correctness
check on the force implementation, independent of integrator accuracy.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass, fields

import numpy as np

from .dynamics import Ensemble, ModelParams, constraint_violation, pair_functional_table, rhs
from .errors import InsufficientSamples, NonPositiveValue
from .geometry import pairwise_transport


@dataclass(frozen=True)
class DiagnosticsFrame:
    """One row of per-frame diagnostics.  Field order is the CSV contract."""

    t: float
    e_total: float
    e_kinetic: float
    e_config: float
    d_x: float
    d_v: float
    v_max: float
    flock_align: float
    antipode_margin: float
    drift_radial: float
    drift_tangency: float
    x_max: float

    def as_row(self) -> tuple:
        return astuple(self)


#: DiagnosticsFrame field names, in CSV column order.
FRAME_FIELDS = tuple(f.name for f in fields(DiagnosticsFrame))


def energy(ensemble: Ensemble, sigma: float) -> tuple[float, float, float]:
    """(E, E_K, E_C); the configurational sum runs over all ordered pairs."""
    X, V = ensemble.positions, ensemble.velocities
    n = ensemble.n
    ek = float((V * V).sum()) / n
    diff = X[:, None, :] - X[None, :, :]
    ec = sigma / (2.0 * n * n) * float((diff * diff).sum())
    return ek + ec, ek, ec


def diameters(ensemble: Ensemble) -> tuple[float, float, float]:
    """(max pair position distance, max pair velocity distance, max speed)."""
    X, V = ensemble.positions, ensemble.velocities
    xd = X[:, None, :] - X[None, :, :]
    vd = V[:, None, :] - V[None, :, :]
    d_x = float(np.sqrt((xd * xd).sum(axis=-1).max()))
    d_v = float(np.sqrt((vd * vd).sum(axis=-1).max()))
    v_max = float(np.sqrt((V * V).sum(axis=1).max()))
    return d_x, d_v, v_max


@dataclass(frozen=True)
class FlockingMetrics:
    """Velocity-alignment product and antipodal margin.

    ``degenerate`` flags pairs inside the antipodal tolerance, whose
    alignment factor |x_i + x_j| ~ 0 makes the product 0 by convention.
    """

    flock_align: float
    antipode_margin: float
    degenerate: bool


def flocking_metrics(ensemble: Ensemble) -> FlockingMetrics:
    """max_{i,j} |x_i+x_j| |R_{x_j->x_i} v_j - v_i| and min_{i,j} |x_i+x_j|."""
    X, V = ensemble.positions, ensemble.velocities
    T, bad = pairwise_transport(X, V, antipodal="zero")
    sums = X[:, None, :] + X[None, :, :]
    margin = np.sqrt((sums * sums).sum(axis=-1))
    mis = T - V[None, :, :]  # mis[j, i] = R_{x_j -> x_i} v_j - v_i
    misnorm = np.sqrt((mis * mis).sum(axis=-1))
    prod = margin * misnorm  # margin is pair-symmetric
    prod[bad] = 0.0
    return FlockingMetrics(float(prod.max()), float(margin.min()), bool(bad.any()))


def max_pair_functional(ensemble: Ensemble) -> float:
    """max over pairs of the Euclidean norm of (X1, X2, X3)."""
    table = pair_functional_table(ensemble)
    return float(np.sqrt((table * table).sum(axis=-1).max()))


def pairwise_dissipation(ensemble: Ensemble, params: ModelParams) -> float:
    """sum_{i,j} (psi_ij / N^2) |R_{x_j -> x_i} v_j - v_i|^2."""
    X, V = ensemble.positions, ensemble.velocities
    n = ensemble.n
    T = pairwise_transport(X, V)
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    psim = params.kernel.psi(np.minimum(dist, 2.0))
    mis = T - V[None, :, :]
    return float((psim * (mis * mis).sum(axis=-1)).sum()) / (n * n)


def energy_rate(ensemble: Ensemble, params: ModelParams) -> float:
    """Analytic dE/dt by the chain rule through the right-hand side."""
    X, V = ensemble.positions, ensemble.velocities
    n = ensemble.n
    _, dV = rhs(ensemble, params)
    kinetic = 2.0 * float((V * dV).sum()) / n
    xd = X[:, None, :] - X[None, :, :]
    vd = V[:, None, :] - V[None, :, :]
    config = params.sigma / (n * n) * float((xd * vd).sum())
    return kinetic + config


def dissipation_residual(ensemble: Ensemble, params: ModelParams) -> float:
    """|dE/dt + dissipation sum|; an identity, so near zero at machine precision."""
    return abs(energy_rate(ensemble, params) + pairwise_dissipation(ensemble, params))


def make_frame(t: float, ensemble: Ensemble, params: ModelParams) -> DiagnosticsFrame:
    e, ek, ec = energy(ensemble, params.sigma)
    d_x, d_v, v_max = diameters(ensemble)
    metrics = flocking_metrics(ensemble)
    radial, tangency = constraint_violation(ensemble.positions, ensemble.velocities)
    return DiagnosticsFrame(
        t=t, e_total=e, e_kinetic=ek, e_config=ec,
        d_x=d_x, d_v=d_v, v_max=v_max,
        flock_align=metrics.flock_align, antipode_margin=metrics.antipode_margin,
        drift_radial=radial, drift_tangency=tangency,
        x_max=max_pair_functional(ensemble),
    )


@dataclass(frozen=True)
class VelocityBoundReport:
    """Outcome of the uniform maximal-speed bound check.

    worst_violation <= 0 means the bound held at every frame.  ``vacuous``
    is set when the declared floor psi_m is not actually a lower bound for
    the pairwise rates along the trajectory, in which case the bound
    asserts nothing.
    """

    worst_violation: float
    vacuous: bool
    psi_m: float


def velocity_bound_check(trajectory, psi_m: float) -> VelocityBoundReport:
    """Check V(t)^2 against the exponential-relaxation envelope.

    V(t)^2 <= e^(-psi_m t / 2) V(0)^2
              + (1 - e^(-psi_m t / 2)) (2 sup E_K + (4 sigma^2/psi_m^2) sup D_x^2)

    with running suprema over [0, t].  Requires psi_ij >= psi_m along the
    whole trajectory; since psi is decreasing that reduces to
    psi_m <= psi(max_t D_x(t)), checked per frame.
    """
    params = trajectory.params
    t = trajectory.times
    v2 = trajectory.series("v_max") ** 2
    ek = trajectory.series("e_kinetic")
    dx2 = trajectory.series("d_x") ** 2

    if psi_m <= 0.0:
        return VelocityBoundReport(float("nan"), True, psi_m)
    psi_floor = float(np.min(params.kernel.psi(np.minimum(trajectory.series("d_x"), 2.0))))
    if psi_m > psi_floor + 1e-12:
        return VelocityBoundReport(float("nan"), True, psi_m)

    decay = np.exp(-0.5 * psi_m * t)
    envelope = decay * v2[0] + (1.0 - decay) * (
        2.0 * np.maximum.accumulate(ek)
        + (4.0 * params.sigma**2 / psi_m**2) * np.maximum.accumulate(dx2)
    )
    return VelocityBoundReport(float(np.max(v2 - envelope)), False, psi_m)


@dataclass(frozen=True)
class RateFit:
    """Least-squares exponential rate of a positive series.

    ``degenerate`` marks a constant series, where r^2 is undefined and both
    outputs are reported as 0.
    """

    rate: float
    r_squared: float
    degenerate: bool
    n_samples: int
    window: tuple[float, float]


def fit_decay_rate(times, values, window) -> RateFit:
    """Fit value ~ a exp(-rate t) by least squares on log(value) over window.

    Requires at least 10 samples inside the window, all strictly positive.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    mask = (t >= lo) & (t <= hi)
    if int(mask.sum()) < 10:
        raise InsufficientSamples(f"{int(mask.sum())} samples in window [{lo}, {hi}], need 10")
    tw, vw = t[mask], v[mask]
    if np.any(vw <= 0.0):
        raise NonPositiveValue("log fit requires strictly positive values")
    logv = np.log(vw)
    slope, intercept = np.polyfit(tw, logv, 1)
    ss_tot = float(((logv - logv.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return RateFit(0.0, 0.0, True, len(tw), (lo, hi))
    resid = logv - (slope * tw + intercept)
    r2 = 1.0 - float((resid**2).sum()) / ss_tot
    return RateFit(-float(slope), r2, False, len(tw), (lo, hi))
