"""Built-in invariant suite behind the ``verify`` subcommand.

Smoke-level sample counts, chosen to finish in well under a minute; the
pytest suite runs the same families of checks at full size.  Every check
is deterministic (fixed seeds) and independent of the others, so they may
run on a thread pool.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import admissibility, diagnostics, dynamics, geometry, kernels
from .integrator import SimConfig, simulate
from .scenarios import paper_scenario


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_unit(rng, n=1):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _random_ensemble(rng, n, speed=1.0) -> dynamics.Ensemble:
    X = _random_unit(rng, n)
    V = speed * rng.standard_normal((n, 3))
    V -= (X * V).sum(axis=1, keepdims=True) * X
    return dynamics.Ensemble(X, V)


def check_transport_identities(samples: int = 2000) -> CheckResult:
    rng = np.random.default_rng(7)
    worst = 0.0
    eye = np.eye(3)
    for _ in range(samples):
        z1 = _random_unit(rng)[0]
        z2 = _random_unit(rng)[0]
        if np.linalg.norm(z1 + z2) <= 1e-6:
            continue
        rot = geometry.rotation_matrix(z1, z2)
        d = z1 @ z2
        c = np.cross(z1, z2)
        v = geometry.project_to_tangent(z1, rng.standard_normal(3))
        worst = max(
            worst,
            np.abs(rot.T @ rot - eye).max(),
            np.abs(rot @ z1 - z2).max(),
            np.abs(rot @ z2 - (2.0 * d * z2 - z1)).max(),
            np.abs(rot @ c - c).max(),
            np.abs(rot.T - geometry.rotation_matrix(z2, z1)).max(),
            abs((rot @ v) @ z2),
            abs(np.linalg.norm(rot @ v) - np.linalg.norm(v)),
        )
    return CheckResult("transport identities", worst <= 1e-12, f"worst residual {worst:.3e}")


def check_equator_transport(angles: int = 100) -> CheckResult:
    e1 = np.array([1.0, 0.0, 0.0])
    e2 = np.array([0.0, 1.0, 0.0])
    e3 = np.array([0.0, 0.0, 1.0])
    worst = 0.0
    for t in np.linspace(0.01, np.pi - 0.01, angles):
        target = np.array([np.cos(t), np.sin(t), 0.0])
        worst = max(
            worst,
            np.abs(geometry.transport(e1, target, e2) - np.array([-np.sin(t), np.cos(t), 0.0])).max(),
            np.abs(geometry.transport(e1, target, e3) - e3).max(),
        )
    return CheckResult("equator transport closed form", worst <= 1e-12, f"worst residual {worst:.3e}")


def check_registered_kernels() -> CheckResult:
    bad = []
    for name in kernels.REGISTRY:
        report = kernels.validate_kernel(kernels.kernel_from_name(name), 10_000)
        if not report.ok:
            bad.append(name)
    return CheckResult("registered kernels valid", not bad,
                       "all pass" if not bad else f"failing: {bad}")


def check_force_tangency(ensembles: int = 100) -> CheckResult:
    rng = np.random.default_rng(11)
    params = dynamics.ModelParams(kernels.paper_kernel(), 1.0)
    worst = 0.0
    for _ in range(ensembles):
        ens = _random_ensemble(rng, int(rng.integers(2, 9)))
        _, dV = dynamics.rhs(ens, params)
        vsq = (ens.velocities**2).sum(axis=1)
        # d<v,x>/dt = <dv,x> + |v|^2 must vanish along the flow
        worst = max(worst, float(np.abs((dV * ens.positions).sum(axis=1) + vsq).max()))
    return CheckResult("constraint compatibility of forces", worst <= 1e-10,
                       f"worst d<v,x>/dt {worst:.3e}")


def check_pair_system(ensembles: int = 100) -> CheckResult:
    rng = np.random.default_rng(13)
    kernel = kernels.paper_kernel()
    worst = 0.0
    for _ in range(ensembles):
        params = dynamics.ModelParams(kernel, float(rng.uniform(0.1, 5.0)))
        ens = _random_ensemble(rng, int(rng.integers(2, 9)))
        lhs = dynamics.pair_derivative_table(ens, params)
        amat = dynamics.coefficient_matrix(kernel.psi0, params.sigma)
        x = dynamics.pair_functional_table(ens)
        f = dynamics.inhomogeneous_table(ens, params)
        rhs_side = np.einsum("ab,ijb->ija", amat, x) + f
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs_side)))
        worst = max(worst, float((np.abs(lhs - rhs_side) / scale).max()))
    return CheckResult("linearized pair system identity", worst <= 1e-9,
                       f"worst relative residual {worst:.3e}")


def check_dissipation_identity(ensembles: int = 100) -> CheckResult:
    rng = np.random.default_rng(17)
    kernel = kernels.paper_kernel()
    worst = 0.0
    for _ in range(ensembles):
        params = dynamics.ModelParams(kernel, float(rng.uniform(0.1, 5.0)))
        ens = _random_ensemble(rng, int(rng.integers(1, 9)))
        res = diagnostics.dissipation_residual(ens, params)
        rate = abs(diagnostics.energy_rate(ens, params))
        worst = max(worst, res / max(1.0, rate))
    return CheckResult("energy dissipation identity", worst <= 1e-10,
                       f"worst scaled residual {worst:.3e}")


def check_decay_rate_eigenvalues(grid: int = 32) -> CheckResult:
    worst = 0.0
    for psi0 in np.linspace(0.2, 25.0, grid):
        for sigma in np.linspace(0.05, 6.0, grid):
            mu = dynamics.spectral_abscissa(psi0, sigma)
            eigs = np.linalg.eigvals(dynamics.coefficient_matrix(psi0, sigma))
            worst = max(worst, abs(mu + eigs.real.max()))
    return CheckResult("spectral abscissa closed form", worst <= 1e-10,
                       f"worst eigensolver gap {worst:.3e}")


def check_remainder_bounds(ensembles: int = 1000) -> CheckResult:
    rng = np.random.default_rng(19)
    kernel = kernels.paper_kernel()
    violations = 0
    for _ in range(ensembles):
        sigma = float(rng.uniform(0.05, 5.0))
        params = dynamics.ModelParams(kernel, sigma)
        ens = _random_ensemble(rng, int(rng.integers(2, 9)), speed=float(rng.uniform(0.2, 1.5)))
        f = dynamics.inhomogeneous_table(ens, params)
        d_x, d_v, v = diagnostics.diameters(ens)
        c1 = kernel.c1_norm
        psi0 = kernel.psi0
        b2 = (v + 6.0 * c1) * v * d_x**2 + psi0 * v * d_x**3 + 0.5 * sigma * d_x**4
        b3 = ((3.0 * v + 6.0 * c1 + 2.0 * sigma) * v * d_x**2
              + (3.0 * v + 7.0 * c1) * v * d_v**2 + psi0 * v * d_x**4)
        c_const = admissibility.aggregate_constant(kernel, sigma)
        agg = c_const * (v + v * v) / 4.0 * (d_x**2 + d_v**2) + 0.5 * sigma * d_x**4
        fnorm = float(np.sqrt((f * f).sum(axis=-1)).max())
        if (np.abs(f[:, :, 1]).max() > b2 + 1e-9 or np.abs(f[:, :, 2]).max() > b3 + 1e-9
                or fnorm > agg + 1e-9):
            violations += 1
    return CheckResult("remainder bounds", violations == 0,
                       f"{violations} violations in {ensembles} states")


def check_pair_ceiling_fixed_point() -> CheckResult:
    kernel = kernels.paper_kernel()
    worst = 0.0
    sign_ok = True
    for sigma in (0.5, 1.0, 2.0, 5.0):
        mu = dynamics.spectral_abscissa(kernel.psi0, sigma)
        c = admissibility.aggregate_constant(kernel, sigma)
        x_m = admissibility.solve_x_m(kernel, sigma, mu, c)
        worst = max(worst, admissibility.x_m_residual(kernel, sigma, mu, c, x_m))
        grid = np.linspace(1e-12, 4.0, 10_000)
        h = np.sqrt(grid) - admissibility._xm_coefficient(sigma, mu, c) * kernel.psi(np.sqrt(grid))
        sign_ok = sign_ok and int((np.diff(np.sign(h)) != 0).sum()) == 1
    return CheckResult("pair ceiling fixed point", worst <= 1e-12 and sign_ok,
                       f"worst residual {worst:.3e}, unique sign change: {sign_ok}")


def check_integrator_order() -> CheckResult:
    params = dynamics.ModelParams(kernels.paper_kernel(), 1.0)
    ens = dynamics.Ensemble([[1.0, 0.0, 0.0]], [[0.0, 1.0, 0.0]])
    errs = []
    for dt in (1e-2, 5e-3):
        traj = simulate(ens, params, SimConfig(dt=dt, t_end=1.0,
                                               frame_stride=int(round(1.0 / dt))))
        end = traj.final.ensemble.positions[0]
        errs.append(np.linalg.norm(end - np.array([np.cos(1.0), np.sin(1.0), 0.0])))
    ratio = errs[0] / errs[1]
    return CheckResult("integrator order", 12.0 <= ratio <= 20.0,
                       f"halving ratio {ratio:.2f}")


def check_energy_monotone() -> CheckResult:
    scenario = paper_scenario(1.0, sim=SimConfig(dt=1e-3, t_end=2.0, frame_stride=10))
    traj = simulate(scenario.ensemble, scenario.params, scenario.sim)
    e = traj.series("e_total")
    worst = float(np.max(np.diff(e) / np.maximum(1.0, e[:-1])))
    return CheckResult("discrete energy monotone", worst <= 1e-8,
                       f"worst frame-to-frame increase {worst:.3e}")


ALL_CHECKS = (
    check_transport_identities,
    check_equator_transport,
    check_registered_kernels,
    check_force_tangency,
    check_pair_system,
    check_dissipation_identity,
    check_decay_rate_eigenvalues,
    check_remainder_bounds,
    check_pair_ceiling_fixed_point,
    check_integrator_order,
    check_energy_monotone,
)


def run_all(workers: int = 1) -> list[CheckResult]:
    """Run every check; results come back in declaration order."""
    if workers <= 1:
        return [check() for check in ALL_CHECKS]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: c(), ALL_CHECKS))
