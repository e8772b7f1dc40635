"""Scenario construction: the built-in 6-agent benchmark and seeded random setups."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Ensemble, ModelParams
from .errors import ConfigError
from .geometry import ANTIPODAL_TOL, project_to_sphere, project_to_tangent, rotation_matrix
from .integrator import SimConfig
from .kernels import paper_kernel

# 6-agent benchmark initial data (4-decimal coordinates; positions are
# renormalized and velocities tangent-projected at construction).
BENCHMARK_POSITIONS = np.array([
    [-0.3903, -0.4756, 0.7883],
    [-0.5800, -0.7067, 0.4052],
    [-0.6746, -0.2998, 0.6746],
    [-0.4472, 0.0000, 0.8944],
    [-0.1249, 0.2084, 0.9700],
    [-0.6236, 0.6236, 0.4714],
])

BENCHMARK_VELOCITIES = np.array([
    [-0.4707, 0.1259, -0.1571],
    [-0.0986, 0.4355, 0.6185],
    [0.1892, 0.1666, 0.2631],
    [0.4605, 0.5046, 0.2302],
    [-0.4914, 0.7722, -0.2292],
    [-0.0148, 0.1342, -0.1971],
])

# Tangency violation beyond which input velocities are rejected instead of
# silently projected.
MAX_INPUT_TANGENCY = 1e-3


@dataclass
class Scenario:
    """A runnable setup: initial state, model parameters, sim controls.

    ``position_adjustment`` / ``velocity_adjustment`` record how far the
    supplied coordinates were moved by renormalization and tangent
    projection, so rounded inputs stay auditable.
    """

    ensemble: Ensemble
    params: ModelParams
    sim: SimConfig
    label: str
    position_adjustment: float = 0.0
    velocity_adjustment: float = 0.0


def _build_ensemble(positions, velocities) -> tuple[Ensemble, float, float]:
    X = np.array(positions, dtype=float)
    V = np.array(velocities, dtype=float)
    Xp = np.array([project_to_sphere(x) for x in X])
    tangency = np.abs((Xp * V).sum(axis=1)).max() if len(V) else 0.0
    if tangency > MAX_INPUT_TANGENCY:
        raise ConfigError(
            f"input velocities violate tangency by {tangency:.3e} "
            f"(> {MAX_INPUT_TANGENCY:.1e}); refusing to project that far")
    Vp = np.array([project_to_tangent(x, v) for x, v in zip(Xp, V)])
    pos_adj = float(np.linalg.norm(Xp - X, axis=1).max()) if len(X) else 0.0
    vel_adj = float(np.linalg.norm(Vp - V, axis=1).max()) if len(V) else 0.0
    return Ensemble(Xp, Vp), pos_adj, vel_adj


def paper_scenario(sigma: float, sim: SimConfig | None = None) -> Scenario:
    """The 6-agent benchmark configuration with the built-in kernel.

    sigma = 1 is the rendezvous benchmark; sigma = 5 makes the same data
    fail the admissibility condition while the simulation still runs.
    """
    if sigma <= 0.0:
        raise ConfigError("sigma must be positive")
    ensemble, pos_adj, vel_adj = _build_ensemble(BENCHMARK_POSITIONS, BENCHMARK_VELOCITIES)
    return Scenario(
        ensemble=ensemble,
        params=ModelParams(kernel=paper_kernel(), sigma=float(sigma)),
        sim=sim if sim is not None else SimConfig(),
        label=f"paper-sigma{sigma:g}",
        position_adjustment=pos_adj,
        velocity_adjustment=vel_adj,
    )


def random_scenario(seed: int, n: int, pos_spread: float, vel_scale: float,
                    params: ModelParams, sim: SimConfig | None = None,
                    label: str = "") -> Scenario:
    """Seeded random setup: a geodesic position cap plus small tangent noise.

    Positions are sampled uniformly (by area) in the cap of geodesic radius
    ``pos_spread`` about a uniformly random center; velocities are
    ``vel_scale`` times tangent-projected standard normals.  Bit
    reproducible per seed.
    """
    if n < 1:
        raise ConfigError("need at least one agent")
    if not 0.0 <= pos_spread <= np.pi / 2:
        raise ConfigError("pos_spread must lie in [0, pi/2]")
    rng = np.random.default_rng(seed)
    center = project_to_sphere(rng.standard_normal(3))
    pole = np.array([0.0, 0.0, 1.0])
    if np.linalg.norm(center + pole) <= 10.0 * ANTIPODAL_TOL:
        center = -center  # keep the pole-to-center transport well-conditioned
    rot = rotation_matrix(pole, center)

    cos_theta = 1.0 - rng.random(n) * (1.0 - np.cos(pos_spread))
    sin_theta = np.sqrt(np.maximum(1.0 - cos_theta**2, 0.0))
    phi = rng.random(n) * 2.0 * np.pi
    local = np.stack([sin_theta * np.cos(phi), sin_theta * np.sin(phi), cos_theta], axis=1)
    X = local @ rot.T
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    V = vel_scale * rng.standard_normal((n, 3))
    V -= (X * V).sum(axis=1, keepdims=True) * X

    return Scenario(
        ensemble=Ensemble(X, V),
        params=params,
        sim=sim if sim is not None else SimConfig(),
        label=label or f"random-seed{seed}",
    )


#: Named presets accepted by the command line and config files.
PRESETS = ("paper-sigma1", "paper-sigma5")


def preset_scenario(name: str, sim: SimConfig | None = None) -> Scenario:
    if name == "paper-sigma1":
        return paper_scenario(1.0, sim=sim)
    if name == "paper-sigma5":
        return paper_scenario(5.0, sim=sim)
    raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
