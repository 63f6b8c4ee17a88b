"""Local-hidden-state bound of the steering functional W.

For an LHS model, W <= 3 - min over pure qubit states psi of
sum_x min_a p(a|x, psi). Two independent routes compute that minimum:

* :func:`optimize_bound` grid-searches the Bloch sphere and refines with
  Nelder-Mead;
* :func:`deterministic_lhs_cross_check` enumerates the 27 deterministic
  responses b = g(y). For fixed g, sum_x p(g(x)|x, psi) is a quadratic form in
  psi, so its minimum is an eigenvalue problem with no search involved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .linalg import eig_hermitian
from .povm import MeasurementSet
from .scenario import deterministic_responses


@dataclass(frozen=True)
class BlochPoint:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0 <= self.theta <= np.pi):
            raise ValueError(f"theta {self.theta!r} outside [0, pi]")
        if not (0 <= self.phi < 2 * np.pi):
            raise ValueError(f"phi {self.phi!r} outside [0, 2 pi)")

    @classmethod
    def wrap(cls, theta: float, phi: float) -> "BlochPoint":
        """Map arbitrary angles onto the canonical ranges describing the same ray."""
        theta = float(np.mod(theta, 2 * np.pi))
        if theta > np.pi:
            theta = 2 * np.pi - theta
            phi = phi + np.pi
        phi = float(np.mod(phi, 2 * np.pi))
        if phi >= 2 * np.pi:
            phi = 0.0
        return cls(theta, phi)

    @classmethod
    def from_ket(cls, v: np.ndarray) -> "BlochPoint":
        v = v / np.linalg.norm(v)
        if abs(v[0]) > 1e-15:
            v = v * (abs(v[0]) / v[0])
        theta = 2 * np.arctan2(abs(v[1]), abs(v[0]))
        phi = np.angle(v[1]) if abs(v[1]) > 1e-15 else 0.0
        return cls.wrap(theta, phi)

    def ket(self) -> np.ndarray:
        return bloch_ket(self.theta, self.phi)


def bloch_ket(theta, phi) -> np.ndarray:
    """cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>, broadcasting over array inputs."""
    theta, phi = np.asarray(theta), np.asarray(phi)
    return np.stack([np.cos(theta / 2) + 0j, np.exp(1j * phi) * np.sin(theta / 2)], axis=-1)


def born_table(alice: MeasurementSet, psi: np.ndarray) -> np.ndarray:
    """p(a|x, psi) for kets with shape (..., 2); result shape (..., x, a)."""
    return np.einsum("...i,xaij,...j->...xa", psi.conj(), alice.array(), psi).real


def lhs_objective(point: BlochPoint, alice: MeasurementSet) -> float:
    """sum_x min_a p(a|x, psi) at the given Bloch point."""
    return float(born_table(alice, point.ket()).min(axis=-1).sum())


def _objective_angles(angles, alice_arr: np.ndarray) -> float:
    psi = bloch_ket(angles[0], angles[1])
    p = np.einsum("i,xaij,j->xa", psi.conj(), alice_arr, psi).real
    return float(p.min(axis=1).sum())


@dataclass(frozen=True)
class BoundResult:
    beta_L: float
    argmin: BlochPoint
    objective_at_argmin: float
    grid_resolution: int
    refinement_iterations: int
    starts: list = field(default_factory=list)


def objective_grid(alice: MeasurementSet, grid: int, theta_max: float = np.pi,
                   phi_max: float = 2 * np.pi, phi_endpoint: bool = False):
    """Objective on a grid x grid mesh; returns (theta, phi, values)."""
    theta = np.linspace(0, theta_max, grid)
    phi = np.linspace(0, phi_max, grid, endpoint=phi_endpoint)
    t, f = np.meshgrid(theta, phi, indexing="ij")
    vals = born_table(alice, bloch_ket(t, f)).min(axis=-1).sum(axis=-1)
    return t, f, vals


def optimize_bound(alice: MeasurementSet, grid: int = 512, n_starts: int = 10,
                   max_iter: int = 200, xatol: float = 1e-9) -> BoundResult:
    """Grid search over the full Bloch sphere, then Nelder-Mead from the best grid cells.

    Deterministic for a given configuration: the grid is fixed, starts are the
    ``n_starts`` lowest grid values (ties by flat index), and the simplex
    search has no randomness.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    t, f, vals = objective_grid(alice, grid)
    flat = vals.ravel()
    starts = np.argsort(flat, kind="stable")[:n_starts]
    arr = alice.array()
    best_val, best_x, iters = np.inf, None, 0
    for idx in starts:
        x0 = np.array([t.flat[idx], f.flat[idx]])
        res = minimize(_objective_angles, x0, args=(arr,), method="Nelder-Mead",
                       options={"maxiter": max_iter, "xatol": xatol, "fatol": 1e-15})
        iters += int(res.nit)
        cand = [(float(res.fun), res.x), (float(flat[idx]), x0)]
        for val, x in cand:
            if val < best_val:
                best_val, best_x = val, x
    point = BlochPoint.wrap(*best_x)
    obj = lhs_objective(point, alice)
    return BoundResult(3 - obj, point, obj, grid, iters, [int(i) for i in starts])


@dataclass(frozen=True)
class StrategyOptimum:
    strategy: tuple  # g(0), g(1), g(2)
    min_sum: float  # min over psi of sum_x p(g(x)|x, psi)
    argmin: np.ndarray  # minimizing ket


def strategy_optima(alice: MeasurementSet) -> list:
    """For each deterministic response g, the smallest eigenvalue of sum_x M_x^{g(x)}."""
    arr = alice.array()
    out = []
    for g, _ in deterministic_responses():
        op = sum(arr[x, g[x]] for x in range(len(g)))
        w, v = eig_hermitian(op)
        out.append(StrategyOptimum(g, float(w[0]), v[:, 0]))
    return out


def deterministic_lhs_cross_check(alice: MeasurementSet) -> float:
    """Largest W any deterministic LHS strategy reaches, i.e. the LHS bound."""
    return 3 - min(s.min_sum for s in strategy_optima(alice))


def restricted_unweighted_bound(alice: MeasurementSet, grid: int = 512) -> float:
    """Bound with each element rescaled to a unit-trace projector, searched on theta <= pi/2, phi <= pi.

    Rescaling makes each setting's probabilities sum to 3/2 rather than 1, so
    this is not a bound on W. It is kept only for side-by-side reporting.
    """
    arr = alice.array()
    traces = np.einsum("xaii->xa", arr).real
    unit = MeasurementSet(tuple(tuple(arr[x, a] / traces[x, a] for a in range(arr.shape[1]))
                                for x in range(arr.shape[0])))
    t, f, vals = objective_grid(unit, grid, np.pi / 2, np.pi, phi_endpoint=True)
    idx = int(np.argmin(vals))
    lo, hi = np.array([0.0, 0.0]), np.array([np.pi / 2, np.pi])

    def clipped(x):
        return _objective_angles(np.clip(x, lo, hi), unit.array())

    res = minimize(clipped, [t.flat[idx], f.flat[idx]], method="Nelder-Mead",
                   options={"maxiter": 400, "xatol": 1e-10, "fatol": 1e-15})
    return 3 - min(float(res.fun), float(vals.flat[idx]))
