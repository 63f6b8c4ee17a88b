"""White-noise robustness of W: noisy constructors, closed forms, and sweeps.

Two parametrizations of the imbalanced state are supported:

``"scaled"``
    (|00> + (1 - delta)|11>) / sqrt(1 + (1 - delta)^2)
``"shifted"``
    ((1/sqrt2)|00> + (1/sqrt2 - delta)|11>) / sqrt(1 - sqrt2 delta + delta^2)

The closed form :func:`f_closed_form` is exact for the ``"shifted"`` family.
The families coincide under delta_shifted = delta_scaled / sqrt2, which is how
closed forms are evaluated for ``"scaled"`` input.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import ket, phi_plus, proj
from .povm import MeasurementSet, Povm, bob_vectors, alice_ideal
from .scenario import diagonal_cells, distribution_from, steering_functional

log = logging.getLogger(__name__)

SQ2 = np.sqrt(2)
EPS_STATE_MAX = 2 / 3
CONVENTIONS = ("shifted", "scaled")


class NoiseRangeError(ValueError):
    pass


class SingularityError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseConfig:
    epsilon: float = 0.0
    delta: float = 0.0
    per_element_epsilons: np.ndarray | None = None  # [x, a]
    epsilon_s: float | None = None

    def __post_init__(self):
        if self.per_element_epsilons is not None or self.epsilon_s is not None:
            parts = [] if self.per_element_epsilons is None else [np.max(self.per_element_epsilons)]
            if self.epsilon_s is not None:
                parts.append(self.epsilon_s)
            object.__setattr__(self, "epsilon", float(max(parts)))
        if self.epsilon < 0:
            raise NoiseRangeError("epsilon must be non-negative")

    def bob(self) -> MeasurementSet:
        eps = self.epsilon if self.per_element_epsilons is None else self.per_element_epsilons
        return noisy_bob(eps)

    def state(self, convention: str = "shifted") -> np.ndarray:
        eps_s = self.epsilon if self.epsilon_s is None else self.epsilon_s
        return noisy_state(eps_s, self.delta, convention)


def noisy_bob(epsilon) -> MeasurementSet:
    """Bob's trine elements mixed with white noise; ``epsilon`` is a scalar or a [x, a] array."""
    eps = np.broadcast_to(np.asarray(epsilon, dtype=float), (3, 3))
    if np.any(eps < 0) or np.any(eps > 1):
        raise NoiseRangeError(f"element noise must lie in [0, 1], got {eps.min()}..{eps.max()}")
    f = bob_vectors()
    eye = np.eye(2)
    return MeasurementSet(tuple(
        Povm(tuple(2 / 3 * ((1 - eps[x, a]) * proj(f[x, a]) + eps[x, a] / 2 * eye) for a in range(3)))
        for x in range(3)
    ))


def imbalanced_ket(delta: float, convention: str = "shifted") -> np.ndarray:
    if convention == "scaled":
        v = [1, 0, 0, 1 - delta]
    elif convention == "shifted":
        v = [1 / SQ2, 0, 0, 1 / SQ2 - delta]
    else:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    return ket(np.array(v, dtype=complex), normalize=True)


def noisy_state(epsilon_s: float, delta: float = 0.0, convention: str = "shifted") -> np.ndarray:
    """(1 - 2 eps) |v><v| + (eps / 2) 1_4 for the imbalanced ket |v>."""
    if delta == 0:
        v = phi_plus()
    else:
        v = imbalanced_ket(delta, convention)
    rho = (1 - 2 * epsilon_s) * proj(v) + epsilon_s / 2 * np.eye(4)
    lo = np.linalg.eigvalsh(rho)[0]
    if epsilon_s < 0 or lo < -1e-12:
        raise NoiseRangeError(f"state noise {epsilon_s} gives a non-PSD state (min eig {lo:.3g})")
    return rho


def diagonal_cell_closed_form(epsilon: float) -> float:
    return epsilon * (3 - 2 * epsilon) / 9


def W_closed_form_epsilon(epsilon: float) -> float:
    return 3 - 3 * epsilon + 2 * epsilon**2


def f_closed_form(delta: float, epsilon: float) -> float:
    """3 - W for the shifted imbalanced state with common noise epsilon."""
    den = -3 + 3 * (SQ2 - delta) * delta
    if abs(den) < 1e-9:
        raise SingularityError(f"closed form is singular at delta = {delta}")
    num = (3 * SQ2 * delta * (3 - 2 * epsilon) * epsilon
           + 3 * epsilon * (-3 + 2 * epsilon)
           + delta**2 * (-2 + epsilon) * (1 + 2 * epsilon))
    return num / den


def W_closed_form_delta(delta: float, epsilon: float, convention: str = "shifted") -> float:
    if convention == "scaled":
        delta = delta / SQ2
    elif convention != "shifted":
        raise ValueError(f"unknown convention {convention!r}")
    return 3 - f_closed_form(delta, epsilon)


def simulate_W(epsilon: float, delta: float = 0.0, convention: str = "shifted") -> float:
    d = distribution_from(noisy_state(epsilon, delta, convention), alice_ideal(), noisy_bob(epsilon))
    return steering_functional(d)


def simulate_config(cfg: NoiseConfig, convention: str = "shifted"):
    """Direct W and diagonal cells for a (possibly per-element) noise configuration."""
    d = distribution_from(cfg.state(convention), alice_ideal(), cfg.bob())
    return steering_functional(d), diagonal_cells(d)


def threshold_epsilon(beta: float) -> float:
    """Smallest epsilon with W_closed_form_epsilon(epsilon) = beta (for 15/8 < beta <= 3)."""
    disc = 9 - 8 * (3 - beta)
    if disc < 0:
        raise ValueError("W(epsilon) never reaches that value")
    return (3 - np.sqrt(disc)) / 4


@dataclass(frozen=True)
class SweepRow:
    delta: float
    epsilon: float
    W_closed_form: float
    W_simulated: float
    clipped: bool = False

    @property
    def discrepancy(self) -> float:
        return abs(self.W_closed_form - self.W_simulated)


def _clip(value: float, lo: float, hi: float, name: str) -> tuple:
    if value < lo or value > hi:
        log.warning("%s = %g outside [%g, %g]; clipped", name, value, lo, hi)
        return min(max(value, lo), hi), True
    return value, False


def sweep(epsilons, deltas, convention: str = "shifted") -> list:
    """Closed-form vs simulated W on the grid, ordered by (delta, epsilon)."""
    rows = []
    for delta in sorted(set(float(d) for d in deltas)):
        for eps in sorted(set(float(e) for e in epsilons)):
            e, clipped = _clip(eps, 0.0, EPS_STATE_MAX, "epsilon")
            rows.append(SweepRow(delta, e, W_closed_form_delta(delta, e, convention),
                                 simulate_W(e, delta, convention), clipped))
    return rows
