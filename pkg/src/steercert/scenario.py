"""The 3-setting, 3-outcome steering scenario.

Joint distributions are arrays indexed ``p[x, y, a, b]`` (settings before
outcomes) and assemblages are indexed ``sigma[y, b]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .linalg import DimensionError, dag, ket, proj
from .povm import MeasurementSet

N_SETTINGS = 3
N_OUTCOMES = 3


class InvalidStateError(ValueError):
    pass


class NormalizationError(ValueError):
    pass


def density(state) -> np.ndarray:
    """Accept a ket or a density matrix; return a validated density matrix."""
    s = np.asarray(state, dtype=complex)
    if s.ndim == 1:
        return proj(ket(s))
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InvalidStateError(f"state must be a ket or square matrix, got shape {s.shape}")
    if np.abs(s - dag(s)).max() > tol.DECOMPOSITION:
        raise InvalidStateError("density matrix is not Hermitian")
    lo = np.linalg.eigvalsh((s + dag(s)) / 2)[0]
    if lo < -tol.DECOMPOSITION:
        raise InvalidStateError(f"density matrix has negative eigenvalue {lo:.3g}")
    tr = np.trace(s).real
    if abs(tr - 1) > tol.DECOMPOSITION:
        raise InvalidStateError(f"density matrix has trace {tr!r}")
    return s


def _check_sizes(rho: np.ndarray, bob: MeasurementSet, alice: MeasurementSet | None = None) -> int:
    dim_a = 2 if alice is None else alice.dim
    if rho.shape[0] != dim_a * bob.dim:
        raise DimensionError(
            f"state dimension {rho.shape[0]} != {dim_a} * {bob.dim} (Alice * Bob)"
        )
    return dim_a


@dataclass(frozen=True)
class Assemblage:
    sigma: np.ndarray  # (y, b, 2, 2)

    def traces(self) -> np.ndarray:
        return np.einsum("ybii->yb", self.sigma).real

    def violations(self, atol: float = tol.DECOMPOSITION) -> list:
        out = []
        for y, b in itertools.product(range(self.sigma.shape[0]), range(self.sigma.shape[1])):
            s = self.sigma[y, b]
            lo = np.linalg.eigvalsh((s + dag(s)) / 2)[0]
            if lo < -atol:
                out.append(f"sigma[{y},{b}] not PSD ({lo:.3g})")
        marg = self.sigma.sum(axis=1)
        spread = np.abs(marg - marg[0]).max()
        if spread > atol:
            out.append(f"marginal depends on y (spread {spread:.3g})")
        tr = np.trace(marg[0]).real
        if abs(tr - 1) > atol:
            out.append(f"total trace {tr!r} != 1")
        return out


@dataclass(frozen=True)
class JointDistribution:
    p: np.ndarray  # (x, y, a, b)

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (N_SETTINGS, N_SETTINGS, N_OUTCOMES, N_OUTCOMES):
            raise DimensionError(f"distribution must have shape (3, 3, 3, 3), got {p.shape}")
        object.__setattr__(self, "p", p)

    def alice_marginal(self) -> np.ndarray:
        return self.p.sum(axis=3)  # (x, y, a)

    def bob_marginal(self) -> np.ndarray:
        return self.p.sum(axis=2)  # (x, y, b)

    def violations(self, atol: float = tol.CERTIFICATION) -> list:
        out = []
        lo, hi = self.p.min(), self.p.max()
        if lo < -tol.DECOMPOSITION or hi > 1 + tol.DECOMPOSITION:
            out.append(f"entries outside [0, 1]: min {lo:.3g}, max {hi:.3g}")
        norm = np.abs(self.p.sum(axis=(2, 3)) - 1).max()
        if norm > atol:
            out.append(f"normalization off by {norm:.3g}")
        am = self.alice_marginal()
        if np.abs(am - am[:, :1]).max() > atol:
            out.append("Alice's marginal depends on y")
        bm = self.bob_marginal()
        if np.abs(bm - bm[:1]).max() > atol:
            out.append("Bob's marginal depends on x")
        return out


def assemblage_from(state, bob: MeasurementSet) -> Assemblage:
    """sigma[y, b] = Tr_B[(1 (x) N_y^b) rho]."""
    rho = density(state)
    dim_a = _check_sizes(rho, bob)
    d = bob.dim
    r = rho.reshape(dim_a, d, dim_a, d)
    sigma = np.einsum("ybkl,iljk->ybij", bob.array(), r)
    return Assemblage(sigma)


def distribution_from(state, alice: MeasurementSet, bob: MeasurementSet) -> JointDistribution:
    """Born-rule table, computed on the full space and via the assemblage; both must agree."""
    rho = density(state)
    dim_a = _check_sizes(rho, bob, alice)
    d = bob.dim
    r = rho.reshape(dim_a, d, dim_a, d)
    ma, nb = alice.array(), bob.array()
    full = np.einsum("xaij,ybkl,jlik->xyab", ma, nb, r)
    sigma = assemblage_from(rho, bob).sigma
    via_sigma = np.einsum("xaij,ybji->xyab", ma, sigma)
    gap = np.abs(full - via_sigma).max()
    if gap > tol.DECOMPOSITION:
        raise RuntimeError(f"Born-rule routes disagree by {gap:.3g}")
    if np.abs(full.imag).max() > tol.DECOMPOSITION:
        raise RuntimeError("complex probabilities; inputs are not Hermitian")
    return JointDistribution(full.real)


def diagonal_cells(d: JointDistribution) -> np.ndarray:
    """p(a, a | x, x) as a 3x3 array indexed [x, a]."""
    return np.array([[d.p[x, x, a, a] for a in range(N_OUTCOMES)] for x in range(N_SETTINGS)])


def steering_functional(d: JointDistribution, atol: float = tol.CERTIFICATION) -> float:
    """W = 3 - sum_{a,x} p(a,a|x,x), checked against the sum of same-setting mismatches."""
    w = N_SETTINGS - diagonal_cells(d).sum()
    mismatch = sum(
        d.p[x, x, a, b]
        for x in range(N_SETTINGS)
        for a in range(N_OUTCOMES)
        for b in range(N_OUTCOMES)
        if a != b
    )
    if abs(w - mismatch) > atol:
        raise NormalizationError(f"W forms disagree: {w!r} vs {mismatch!r}")
    return float(w)


@dataclass(frozen=True)
class LhsModel:
    weights: np.ndarray  # (L,)
    states: np.ndarray  # (L, 2) kets
    response: np.ndarray  # (L, y, b): p_lambda(b|y)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        s = np.array([ket(v) for v in self.states])
        r = np.asarray(self.response, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1) > tol.CONSTRUCTION:
            raise ValueError("weights must be a probability vector")
        if r.shape != (len(w), N_SETTINGS, N_OUTCOMES):
            raise DimensionError(f"response must have shape ({len(w)}, 3, 3)")
        if np.any(r < 0) or np.abs(r.sum(axis=2) - 1).max() > tol.CONSTRUCTION:
            raise ValueError("each response row must be a probability distribution")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "response", r)


def distribution_from_lhs(model: LhsModel, alice: MeasurementSet) -> JointDistribution:
    # The hidden variable fixes Bob's outcome statistics p(b|y, lambda).
    born = np.einsum("xaij,lj,li->lxa", alice.array(), model.states, model.states.conj()).real
    p = np.einsum("l,lxa,lyb->xyab", model.weights, born, model.response)
    return JointDistribution(p)


def deterministic_responses():
    """All 27 maps g: y -> b, as 0/1 response matrices indexed [y, b]."""
    for g in itertools.product(range(N_OUTCOMES), repeat=N_SETTINGS):
        r = np.zeros((N_SETTINGS, N_OUTCOMES))
        r[np.arange(N_SETTINGS), g] = 1
        yield g, r


def random_lhs_model(rng: np.random.Generator, n_hidden: int) -> LhsModel:
    w = rng.dirichlet(np.ones(n_hidden))
    z = rng.standard_normal((n_hidden, 2)) + 1j * rng.standard_normal((n_hidden, 2))
    states = z / np.linalg.norm(z, axis=1, keepdims=True)
    resp = rng.dirichlet(np.ones(N_OUTCOMES), size=(n_hidden, N_SETTINGS))
    return LhsModel(w, states, resp)


@dataclass(frozen=True)
class ShotRecords:
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray
    seed: int

    def __len__(self):
        return len(self.x)

    def rows(self) -> np.ndarray:
        return np.column_stack([self.x, self.y, self.a, self.b])


def sample_shots(d: JointDistribution, n: int, seed: int, policy=None) -> ShotRecords:
    """Draw ``n`` (x, y, a, b) records.

    ``policy`` is a 3x3 array of setting probabilities (uniform by default).
    Outcomes use inverse-CDF sampling over the nine (a, b) pairs, one uniform
    draw per shot.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    policy = np.full((3, 3), 1 / 9) if policy is None else np.asarray(policy, dtype=float)
    if policy.shape != (3, 3) or np.any(policy < 0) or abs(policy.sum() - 1) > 1e-12:
        raise ValueError("policy must be a 3x3 probability table")
    if np.any(np.diag(policy) <= 0):
        raise ValueError("policy must give positive weight to every x == y setting")
    rng = np.random.default_rng(seed)
    setting = rng.choice(9, size=n, p=policy.ravel())
    u = rng.random(n)
    cdf = np.cumsum(np.clip(d.p, 0, None).reshape(9, 9), axis=1)
    cdf /= cdf[:, -1:]
    outcome = np.minimum((u[:, None] >= cdf[setting]).sum(axis=1), 8)
    return ShotRecords(setting // 3, setting % 3, outcome // 3, outcome % 3, seed)


def estimate_W(records: ShotRecords) -> tuple:
    """Plug-in estimate of W and its binomial standard error."""
    w_hat, var = float(N_SETTINGS), 0.0
    for x in range(N_SETTINGS):
        sel = (records.x == x) & (records.y == x)
        n_x = int(sel.sum())
        if n_x == 0:
            raise ValueError(f"no shots recorded for setting x = y = {x}")
        q = float(np.mean(records.a[sel] == records.b[sel]))
        w_hat -= q
        var += q * (1 - q) / n_x
    return w_hat, float(np.sqrt(var))
