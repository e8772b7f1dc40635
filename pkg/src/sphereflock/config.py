"""Flat key = value run configuration: parse, emit, and scenario building.

Sections: [kernel], [params], [sim], [scenario].  No nesting; every value
round-trips exactly (floats are written with 17 significant digits).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams
from .errors import ConfigError
from .integrator import SimConfig
from .kernels import kernel_from_name
from .scenarios import (BENCHMARK_POSITIONS, BENCHMARK_VELOCITIES, Scenario,
                        _build_ensemble, random_scenario)

_SCENARIO_KINDS = ("paper", "random", "explicit")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ScenarioSpec:
    """Declarative initial-state description."""

    kind: str = "paper"
    n: int = 6
    pos_spread: float = math.pi / 64
    vel_scale: float = 0.01
    seed: int = 0
    label: str = ""
    positions: tuple = ()
    velocities: tuple = ()

    def __post_init__(self):
        if self.kind not in _SCENARIO_KINDS:
            raise ConfigError(f"scenario kind must be one of {_SCENARIO_KINDS}, got {self.kind!r}")
        if self.kind == "explicit" and (not self.positions or
                                        len(self.positions) != len(self.velocities)):
            raise ConfigError("explicit scenario needs matching x<i>/v<i> lists")


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run."""

    kernel_name: str = "paper"
    kernel_params: tuple = ()
    sigma: float = 1.0
    sim: SimConfig = field(default_factory=SimConfig)
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)


def emit_config(cfg: RunConfig) -> str:
    """Serialize a RunConfig to flat key = value text."""
    out = io.StringIO()
    print("[kernel]", file=out)
    print(f"name = {cfg.kernel_name}", file=out)
    print(f"params = {' '.join(_fmt(p) for p in cfg.kernel_params)}", file=out)
    print("", file=out)
    print("[params]", file=out)
    print(f"sigma = {_fmt(cfg.sigma)}", file=out)
    print("", file=out)
    print("[sim]", file=out)
    print(f"dt = {_fmt(cfg.sim.dt)}", file=out)
    print(f"t_end = {_fmt(cfg.sim.t_end)}", file=out)
    print(f"projection = {'on' if cfg.sim.projection else 'off'}", file=out)
    print(f"frame_stride = {cfg.sim.frame_stride}", file=out)
    print(f"seed = {cfg.sim.seed}", file=out)
    print("", file=out)
    print("[scenario]", file=out)
    sc = cfg.scenario
    print(f"kind = {sc.kind}", file=out)
    print(f"label = {sc.label}", file=out)
    print(f"n = {sc.n}", file=out)
    print(f"pos_spread = {_fmt(sc.pos_spread)}", file=out)
    print(f"vel_scale = {_fmt(sc.vel_scale)}", file=out)
    print(f"seed = {sc.seed}", file=out)
    for i, (x, v) in enumerate(zip(sc.positions, sc.velocities), start=1):
        print(f"x{i} = {' '.join(_fmt(c) for c in x)}", file=out)
        print(f"v{i} = {' '.join(_fmt(c) for c in v)}", file=out)
    return out.getvalue()


def parse_config(text: str) -> RunConfig:
    """Parse flat key = value text back into a RunConfig."""
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    try:
        kernel = parser["kernel"] if parser.has_section("kernel") else {}
        name = kernel.get("name", "paper")
        params = tuple(float(tok) for tok in kernel.get("params", "").split())

        sigma = float(parser.get("params", "sigma", fallback="1"))

        sim_sec = parser["sim"] if parser.has_section("sim") else {}
        proj = sim_sec.get("projection", "on").strip().lower()
        if proj not in ("on", "off"):
            raise ConfigError(f"projection must be on or off, got {proj!r}")
        sim = SimConfig(
            dt=float(sim_sec.get("dt", "1e-3")),
            t_end=float(sim_sec.get("t_end", "80")),
            projection=proj == "on",
            frame_stride=int(sim_sec.get("frame_stride", "10")),
            seed=int(sim_sec.get("seed", "0")),
        )

        sc = parser["scenario"] if parser.has_section("scenario") else {}
        kind = sc.get("kind", "paper")
        positions, velocities = [], []
        i = 1
        while f"x{i}" in sc:
            if f"v{i}" not in sc:
                raise ConfigError(f"x{i} given without v{i}")
            positions.append(tuple(float(tok) for tok in sc[f"x{i}"].split()))
            velocities.append(tuple(float(tok) for tok in sc[f"v{i}"].split()))
            if len(positions[-1]) != 3 or len(velocities[-1]) != 3:
                raise ConfigError(f"x{i}/v{i} must each have 3 components")
            i += 1
        spec = ScenarioSpec(
            kind=kind,
            n=int(sc.get("n", "6")),
            pos_spread=float(sc.get("pos_spread", _fmt(math.pi / 64))),
            vel_scale=float(sc.get("vel_scale", "0.01")),
            seed=int(sc.get("seed", "0")),
            label=sc.get("label", ""),
            positions=tuple(positions),
            velocities=tuple(velocities),
        )
        return RunConfig(kernel_name=name, kernel_params=params, sigma=sigma,
                         sim=sim, scenario=spec)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_config(cfg))


def build_scenario(cfg: RunConfig) -> Scenario:
    """Materialize the configured scenario (kernel, parameters, state)."""
    kernel = kernel_from_name(cfg.kernel_name, *cfg.kernel_params)
    params = ModelParams(kernel=kernel, sigma=cfg.sigma)
    sc = cfg.scenario
    if sc.kind == "paper":
        ensemble, pos_adj, vel_adj = _build_ensemble(BENCHMARK_POSITIONS, BENCHMARK_VELOCITIES)
        label = sc.label or f"paper-sigma{cfg.sigma:g}"
        return Scenario(ensemble=ensemble, params=params, sim=cfg.sim, label=label,
                        position_adjustment=pos_adj, velocity_adjustment=vel_adj)
    if sc.kind == "random":
        return random_scenario(sc.seed, sc.n, sc.pos_spread, sc.vel_scale,
                               params, sim=cfg.sim, label=sc.label)
    ensemble, pos_adj, vel_adj = _build_ensemble(np.array(sc.positions),
                                                 np.array(sc.velocities))
    return Scenario(ensemble=ensemble, params=params, sim=cfg.sim,
                    label=sc.label or "explicit",
                    position_adjustment=pos_adj, velocity_adjustment=vel_adj)


def preset_config(name: str) -> RunConfig:
    """RunConfig equivalents of the named presets."""
    if name == "paper-sigma1":
        return RunConfig(sigma=1.0, scenario=ScenarioSpec(kind="paper", label=name))
    if name == "paper-sigma5":
        return RunConfig(sigma=5.0, scenario=ScenarioSpec(kind="paper", label=name))
    raise ConfigError(f"unknown preset {name!r}")
