"""Model right-hand side, Lagrange multiplier, and the linearized pair system.

The second-order dynamics on the unit sphere for agents (x_i, v_i):

    dx_i/dt = v_i
    dv_i/dt = -(|v_i|^2/|x_i|^2) x_i
              + (1/N) sum_k psi(|x_i - x_k|) (R_{x_k -> x_i} v_k - v_i)
              + (sigma/N) sum_k (x_k - <x_i, x_k> x_i)

The centripetal term is the Lagrange multiplier keeping positions on the
sphere and velocities tangent; the k = i summand vanishes under the
coincident-limit convention R = I.

For every pair (i, j) the triple

    X = (|x_i - x_j|^2, <v_i - v_j, x_i - x_j>, |v_i - v_j|^2)

satisfies dX/dt = A X + F with the constant matrix A built from psi0 and
sigma and an inhomogeneous remainder F = (0, F2, F3).  Both sides are
implemented here independently: the chain-rule derivative of X through the
right-hand side (``pair_derivative_table``) and the explicit A/F formulas,
so their agreement is a genuine whole-formula cross-check.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import AntipodalPair, InvalidEnsemble
from .geometry import _transport_table, antipodal_mask
from .kernels import Kernel

# Ensemble state invariants (looser than construction-time projection noise
# so that long projected runs stay admissible).
RADIAL_TOL = 1e-9
TANGENCY_TOL = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Communication kernel and bonding-force rate."""

    kernel: Kernel
    sigma: float

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")


@dataclass(eq=False)
class Ensemble:
    """Positions on the unit sphere and tangent velocities for N agents.

    Arrays are (n, 3) float64 and copied on construction.  Validation
    enforces |norm(x_i) - 1| <= 1e-9 and |<v_i, x_i>| <= 1e-8; pass
    ``validate=False`` to hold deliberately off-manifold states (e.g. for
    drift measurements).
    """

    positions: np.ndarray
    velocities: np.ndarray
    validate: InitVar[bool] = True

    def __post_init__(self, validate):
        self.positions = np.array(self.positions, dtype=float)
        self.velocities = np.array(self.velocities, dtype=float)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise InvalidEnsemble(f"positions must be (n, 3), got {self.positions.shape}")
        if self.velocities.shape != self.positions.shape:
            raise InvalidEnsemble("positions and velocities must have the same shape")
        if validate:
            self.check()

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def check(self) -> None:
        radial, tangency = constraint_violation(self.positions, self.velocities)
        if radial > RADIAL_TOL:
            raise InvalidEnsemble(f"max |norm(x)-1| = {radial:.3e} exceeds {RADIAL_TOL:.1e}")
        if tangency > TANGENCY_TOL:
            raise InvalidEnsemble(f"max |<v, x>| = {tangency:.3e} exceeds {TANGENCY_TOL:.1e}")

    def copy(self) -> "Ensemble":
        return Ensemble(self.positions, self.velocities, validate=False)

    @classmethod
    def projected(cls, positions, velocities) -> "Ensemble":
        """Build a valid ensemble by renormalizing and tangent-projecting."""
        X = np.array(positions, dtype=float)
        V = np.array(velocities, dtype=float)
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        V -= (X * V).sum(axis=1, keepdims=True) * X
        return cls(X, V)


def constraint_violation(X: np.ndarray, V: np.ndarray) -> tuple[float, float]:
    """(max_i |norm(x_i)-1|, max_i |<v_i, x_i>|) for raw state arrays."""
    radial = float(np.max(np.abs(np.linalg.norm(X, axis=1) - 1.0)))
    tangency = float(np.max(np.abs((X * V).sum(axis=1))))
    return radial, tangency


def _pair_tables(X: np.ndarray, V: np.ndarray, kernel: Kernel):
    """Shared per-pair quantities: <x_k,x_i>, psi matrix, transports T[k,i]."""
    dots = X @ X.T
    bad = antipodal_mask(dots)
    if bad.any():
        k, i = map(int, np.argwhere(bad)[0])
        raise AntipodalPair(f"agents {k} and {i} are antipodal", pair=(k, i))
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=-1))
    psim = kernel.psi(np.minimum(dist, 2.0))
    T = _transport_table(X, V, dots)
    return dots, psim, T


def _rhs_arrays(X: np.ndarray, V: np.ndarray, params: ModelParams):
    """Hot-path right-hand side on raw (n, 3) arrays."""
    n = X.shape[0]
    dots, psim, T = _pair_tables(X, V, params.kernel)
    # coupling_i = (1/n) sum_k psi[i,k] (T[k,i] - v_i); fixed ascending-k
    # summation order via the axis-0 reductions below.
    psim_t = psim.T
    S = np.empty_like(V)
    S[:, 0] = (psim_t * T[:, :, 0]).sum(axis=0)
    S[:, 1] = (psim_t * T[:, :, 1]).sum(axis=0)
    S[:, 2] = (psim_t * T[:, :, 2]).sum(axis=0)
    coupling = (S - psim.sum(axis=1)[:, None] * V) / n
    bonding = (params.sigma / n) * (X.sum(axis=0)[None, :] - dots.sum(axis=1)[:, None] * X)
    vsq = (V * V).sum(axis=1)
    dV = -vsq[:, None] * X + coupling + bonding
    return V.copy(), dV


def rhs(ensemble: Ensemble, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative (dx, dv) of the ensemble state.

    Costs O(n^2) transport evaluations; nothing is cached across calls.
    Raises AntipodalPair at singular configurations rather than
    regularizing, since silent regularization would mask blowup.
    """
    return _rhs_arrays(ensemble.positions, ensemble.velocities, params)


def lagrange_multiplier(ensemble: Ensemble, i: int, params: ModelParams) -> float:
    """Multiplier lambda_i of the constrained formulation.

    lambda_i = -|v_i|^2/|x_i|^2 - (sigma/N) sum_k <x_k - x_i, x_i>/<x_i, x_i>.
    """
    X, V = ensemble.positions, ensemble.velocities
    xi, vi = X[i], V[i]
    xsq = float(xi @ xi)
    bond = float(((X - xi) @ xi).sum()) / xsq
    return -float(vi @ vi) / xsq - (params.sigma / ensemble.n) * bond


def pair_functional_table(ensemble: Ensemble) -> np.ndarray:
    """All pair triples (X1, X2, X3) as an (n, n, 3) array."""
    X, V = ensemble.positions, ensemble.velocities
    xd = X[:, None, :] - X[None, :, :]
    vd = V[:, None, :] - V[None, :, :]
    out = np.empty((ensemble.n, ensemble.n, 3))
    out[:, :, 0] = (xd * xd).sum(axis=-1)
    out[:, :, 1] = (vd * xd).sum(axis=-1)
    out[:, :, 2] = (vd * vd).sum(axis=-1)
    return out


def pair_functional(ensemble: Ensemble, i: int, j: int) -> np.ndarray:
    """(|x_i-x_j|^2, <v_i-v_j, x_i-x_j>, |v_i-v_j|^2) for one pair."""
    X, V = ensemble.positions, ensemble.velocities
    xd = X[i] - X[j]
    vd = V[i] - V[j]
    return np.array([xd @ xd, vd @ xd, vd @ vd])


def coefficient_matrix(psi0: float, sigma: float) -> np.ndarray:
    """Constant coefficient matrix A of the linearized pair system."""
    return np.array([
        [0.0, 2.0, 0.0],
        [-sigma, -psi0, 1.0],
        [0.0, -2.0 * sigma, -2.0 * psi0],
    ])


def spectral_abscissa(psi0: float, sigma: float) -> float:
    """Decay rate mu: the negated maximum real part of the eigenvalues of A.

    The spectrum is {-psi0, -psi0 +- sqrt(psi0^2 - 4 sigma)}, so mu = psi0
    when psi0^2 <= 4 sigma and mu = psi0 - sqrt(psi0^2 - 4 sigma) otherwise
    (evaluated as 4 sigma / (psi0 + sqrt(.)) to avoid cancellation); in the
    second branch mu >= 2 sigma / psi0.
    """
    if psi0 <= 0.0 or sigma <= 0.0:
        raise ValueError("spectral abscissa requires psi0 > 0 and sigma > 0")
    disc = psi0 * psi0 - 4.0 * sigma
    if disc <= 0.0:
        return float(psi0)
    return float(4.0 * sigma / (psi0 + np.sqrt(disc)))


def inhomogeneous_table(ensemble: Ensemble, params: ModelParams) -> np.ndarray:
    """All inhomogeneous remainders F = (0, F2, F3) as an (n, n, 3) array.

    Implemented exactly as the term-by-term definitions (kinetic term,
    psi0-weighted transport differences, kernel-deviation sums, bonding
    terms in their <x_i,x_k>-1 form), not via algebraically equivalent
    regroupings, so the dX = AX + F identity stays a real cross-check.
    """
    X, V = ensemble.positions, ensemble.velocities
    n = ensemble.n
    sigma = params.sigma
    psi0 = params.kernel.psi0
    dots, psim, T = _pair_tables(X, V, params.kernel)

    x1 = pair_functional_table(ensemble)[:, :, 0]
    vsq = (V * V).sum(axis=1)
    # G[p, q] = sum_k <T[k,p], x_q>;  H[p, q] = sum_k <T[k,p], v_q>
    Tsum = np.einsum("kpa->pa", T)
    G = Tsum @ X.T
    H = Tsum @ V.T
    # P[p] = sum_k (psi[p,k] - psi0) (T[k,p] - v_p)
    dpsi = psim - psi0
    P = np.einsum("pk,kpa->pa", dpsi, T) - dpsi.sum(axis=1)[:, None] * V
    PX = P @ X.T
    PV = P @ V.T
    XV = X @ V.T  # XV[p, q] = <x_p, v_q>

    f2 = -0.5 * np.add.outer(vsq, vsq) * x1
    gd = np.diag(G)
    f2 += (psi0 / n) * (gd[:, None] - G - G.T + gd[None, :])
    pxd = np.diag(PX)
    f2 += (pxd[:, None] - PX - PX.T + pxd[None, :]) / n
    srow = x1.sum(axis=1)
    f2 += (sigma / (4.0 * n)) * np.add.outer(srow, srow) * x1

    xvd = np.diag(XV)
    f3 = 2.0 * (-vsq[:, None] * xvd[:, None] + vsq[:, None] * XV
                + vsq[None, :] * XV.T - vsq[None, :] * xvd[None, :])
    hd = np.diag(H)
    f3 += (2.0 * psi0 / n) * (hd[:, None] - H - H.T + hd[None, :])
    pvd = np.diag(PV)
    f3 += 2.0 * (pvd[:, None] - PV - PV.T + pvd[None, :]) / n
    bsum = dots.sum(axis=1) - n  # sum_k (<x_p, x_k> - 1)
    f3 += (2.0 * sigma / n) * (bsum[:, None] * XV + bsum[None, :] * XV.T)

    out = np.zeros((n, n, 3))
    out[:, :, 1] = f2
    out[:, :, 2] = f3
    return out


def inhomogeneous_term(ensemble: Ensemble, i: int, j: int, params: ModelParams) -> np.ndarray:
    """F^{ij} = (0, F2, F3) for one pair."""
    return inhomogeneous_table(ensemble, params)[i, j]


def pair_derivative_table(ensemble: Ensemble, params: ModelParams) -> np.ndarray:
    """Chain-rule time derivative of every pair triple, through ``rhs``.

    dX1 = 2 X2;  dX2 = X3 + <dv_i - dv_j, x_i - x_j>;
    dX3 = 2 <dv_i - dv_j, v_i - v_j>.  This is the independent left-hand
    side of the dX = AX + F identity.
    """
    X, V = ensemble.positions, ensemble.velocities
    _, dV = rhs(ensemble, params)
    xd = X[:, None, :] - X[None, :, :]
    vd = V[:, None, :] - V[None, :, :]
    ad = dV[:, None, :] - dV[None, :, :]
    table = pair_functional_table(ensemble)
    out = np.empty_like(table)
    out[:, :, 0] = 2.0 * table[:, :, 1]
    out[:, :, 1] = table[:, :, 2] + (ad * xd).sum(axis=-1)
    out[:, :, 2] = 2.0 * (ad * vd).sum(axis=-1)
    return out
