"""Constructive self-test of |phi+> and Bob's trine POVMs from maximal violation of W.

Given a pure state on C^2 (x) C^d and Bob's three 3-outcome POVMs, the
certifier builds the local unitary U_B from the Schmidt decomposition, maps
the state onto (1 (x) P_B)|phi+>, compresses Bob's elements onto the support
of his reduced state, and compares everything against the ideal targets.
:func:`verify_identity_chain` also reports the residual of every
intermediate identity used to reach that conclusion, so a near-ideal input
can be checked step by step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .linalg import (
    DimensionError,
    complete_basis,
    dag,
    eig_hermitian,
    ket,
    phi_plus,
    proj,
    schmidt_decompose,
)
from .povm import MeasurementSet, alice_ideal, alice_vectors, bob_vectors, validate_set
from .scenario import diagonal_cells, distribution_from


class CertificationError(ValueError):
    pass


class NotEntangledError(CertificationError):
    pass


class InvalidInputError(CertificationError):
    pass


@dataclass(frozen=True)
class CertificationInput:
    state: np.ndarray  # ket on C^2 (x) C^d
    bob: MeasurementSet

    def __post_init__(self):
        object.__setattr__(self, "state", ket(self.state))
        if self.state.size != 2 * self.bob.dim:
            raise DimensionError(
                f"state has {self.state.size} amplitudes, expected 2 * {self.bob.dim}"
            )

    def check(self) -> None:
        if len(self.bob) != 3 or any(len(p) != 3 for p in self.bob):
            raise InvalidInputError("Bob must have exactly three 3-outcome measurements")
        bad = validate_set(self.bob)
        if bad:
            raise InvalidInputError("; ".join(f"setting {x}: {v}" for x, v in bad))


@dataclass(frozen=True)
class Extraction:
    unitary: np.ndarray  # U_B, d x d
    p_b: np.ndarray  # 2 x 2
    support_projector: np.ndarray  # Pi_B, d x d
    schmidt_coefficients: np.ndarray

    def compressed(self, bob: MeasurementSet) -> np.ndarray:
        """U_B Pi N Pi U_B^dag restricted to its upper-left 2x2 block, indexed [y, b]."""
        u, pi = self.unitary, self.support_projector
        arr = bob.array()
        full = np.einsum("ij,jk,ybkl,lm,mn->ybin", u, pi, arr, pi, dag(u))
        return full[:, :, :2, :2]


@dataclass(frozen=True)
class CertificationReport:
    passed: bool
    tolerance: float
    max_diagonal_probability: float
    state_fidelity: float
    measurement_deviation: float
    p_b_deviation_from_scaled_identity: float
    extracted_unitary: np.ndarray
    identity_residuals: dict

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_diagonal_probability": self.max_diagonal_probability,
            "state_fidelity": self.state_fidelity,
            "measurement_deviation": self.measurement_deviation,
            "p_b_deviation_from_scaled_identity": self.p_b_deviation_from_scaled_identity,
            "identity_residuals": dict(self.identity_residuals),
        }


def target_elements() -> np.ndarray:
    """(2/3)|e*perp_{b,y}><e*perp_{b,y}|, indexed [y, b]."""
    f = bob_vectors()
    return np.array([[2 / 3 * proj(f[y, b]) for b in range(3)] for y in range(3)])


def check_max_violation_conditions(inp: CertificationInput) -> float:
    """Largest p(a, a | x, x) with Alice's trine measurements."""
    dist = distribution_from(inp.state, alice_ideal(), inp.bob)
    return float(diagonal_cells(dist).max())


def extract_unitary(inp: CertificationInput) -> Extraction:
    """Build U_B with U_B|t_i> = |s_i*>, P_B = sqrt(2) sum_i lambda_i |s_i*><s_i*|, and Pi_B.

    The C^2 targets |s_i*> sit in the first two coordinates of C^d; the
    orthogonal complement of span{t_i} is mapped onto the remaining
    coordinates by a fixed completion. On the support, U_B does not depend on
    which Schmidt basis the eigensolver returns (the phases and, in the
    degenerate case, the basis rotation cancel), so the output is reproducible.
    """
    d = inp.bob.dim
    sf = schmidt_decompose(inp.state)
    if sf.rank < 2:
        raise NotEntangledError("state has Schmidt rank 1: not entangled, nothing to certify")
    s_conj = [np.conj(s) for s in sf.left]
    src = complete_basis(sf.right, d)
    dst = complete_basis([np.concatenate([s, np.zeros(d - 2)]) for s in s_conj], d)
    u = dst @ dag(src)
    p_b = np.sqrt(2) * sum(lam * proj(s) for lam, s in zip(sf.coefficients, s_conj))
    pi = sum(proj(t) for t in sf.right)
    if np.linalg.eigvalsh(p_b)[0] <= tol.SCHMIDT_CUTOFF:
        raise NotEntangledError("P_B is rank deficient")
    return Extraction(u, p_b, pi, sf.coefficients)


def _embed(v2: np.ndarray, d: int) -> np.ndarray:
    out = np.zeros(2 * d, dtype=complex)
    m = v2.reshape(2, 2)
    out.reshape(2, d)[:, :2] = m
    return out


def verify_identity_chain(inp: CertificationInput, ext: Extraction | None = None) -> dict:
    """Residual of each step from maximal violation to the self-testing statement.

    Keys and what they measure (all should vanish on an ideal instance):

    * ``unitary``: ||U_B^dag U_B - 1||.
    * ``state_map``: ||(1 (x) U_B)|psi> - (1 (x) P_B)|phi+>||.
    * ``completeness``: max_y ||sum_b Ntilde_y^b - 1|| on the support.
    * ``trace_orthogonality``: max_{a,x} |Tr[P Ntilde_x^a P (M_x^a)^T]|.
    * ``weighted_overlap``: max_{a,x} sum_i alpha_i |<e*_{a,x}|k_i>|^2 from the
      eigendecomposition of P Ntilde P.
    * ``rank_one``: max_{a,x} ||P Ntilde_x^a P - beta_{a,x}|e*perp><e*perp|||.
    * ``p_b_squared``: max_x ||P_B^2 - sum_a beta_{a,x}|e*perp><e*perp|||.
    * ``beta_equal``: max |beta_{a,x} - beta_{0,0}|.
    * ``beta_value``: max |beta_{a,x} - 2/3|.
    * ``p_b_scaled_identity``: ||P_B^2 - (3 beta_{0,0}/2) 1||.
    """
    ext = extract_unitary(inp) if ext is None else ext
    d = inp.bob.dim
    u, p = ext.unitary, ext.p_b
    nt = ext.compressed(inp.bob)
    m = alice_ideal().array()
    e = np.array([[np.conj(v) for v in row] for row in alice_vectors()])
    f = bob_vectors()

    res = {}
    res["unitary"] = float(np.linalg.norm(dag(u) @ u - np.eye(d)))
    lhs = np.kron(np.eye(2), u) @ inp.state
    rhs = _embed(np.kron(np.eye(2), p) @ phi_plus(), d)
    res["state_map"] = float(np.linalg.norm(lhs - rhs))
    res["completeness"] = float(max(np.linalg.norm(nt[y].sum(axis=0) - np.eye(2)) for y in range(3)))

    pnp = np.einsum("ij,yajk,kl->yail", p, nt, p)
    tr, overlap, rank1, beta = [], [], [], np.zeros((3, 3))
    for x in range(3):
        for a in range(3):
            tr.append(abs(np.trace(pnp[x, a] @ m[x, a].T)))
            alpha, k = eig_hermitian(pnp[x, a])
            overlap.append(abs(sum(alpha[i] * abs(e[x, a].conj() @ k[:, i]) ** 2 for i in range(2))))
            beta[x, a] = (f[x, a].conj() @ pnp[x, a] @ f[x, a]).real
            rank1.append(np.linalg.norm(pnp[x, a] - beta[x, a] * proj(f[x, a])))
    res["trace_orthogonality"] = float(max(tr))
    res["weighted_overlap"] = float(max(overlap))
    res["rank_one"] = float(max(rank1))
    p2 = p @ p
    res["p_b_squared"] = float(max(
        np.linalg.norm(p2 - sum(beta[x, a] * proj(f[x, a]) for a in range(3))) for x in range(3)
    ))
    res["beta_equal"] = float(np.abs(beta - beta[0, 0]).max())
    res["beta_value"] = float(np.abs(beta - 2 / 3).max())
    res["p_b_scaled_identity"] = float(np.linalg.norm(p2 - 1.5 * beta[0, 0] * np.eye(2)))
    return res


def betas(inp: CertificationInput) -> np.ndarray:
    """beta_{a,x} = <e*perp| P_B Ntilde_x^a P_B |e*perp>, indexed [x, a]."""
    ext = extract_unitary(inp)
    p, nt, f = ext.p_b, ext.compressed(inp.bob), bob_vectors()
    return np.array([[(f[x, a].conj() @ p @ nt[x, a] @ p @ f[x, a]).real for a in range(3)]
                     for x in range(3)])


def certify(inp: CertificationInput, tolerance: float = tol.CERTIFICATION) -> CertificationReport:
    inp.check()
    diag = check_max_violation_conditions(inp)
    ext = extract_unitary(inp)
    d = inp.bob.dim
    transformed = np.kron(np.eye(2), ext.unitary) @ inp.state
    fidelity = float(abs(_embed(phi_plus(), d).conj() @ transformed) ** 2)
    nt = ext.compressed(inp.bob)
    target = target_elements()
    dev = max(np.linalg.norm(nt[y, b] - target[y, b], 2) for y in range(3) for b in range(3))
    p2 = ext.p_b @ ext.p_b
    scale = np.trace(p2).real / 2
    p_dev = float(np.linalg.norm(p2 - scale * np.eye(2)))
    residuals = verify_identity_chain(inp, ext)
    passed = diag <= tolerance and fidelity >= 1 - tolerance and dev <= tolerance
    return CertificationReport(bool(passed), tolerance, diag, fidelity, float(dev), p_dev,
                               ext.unitary, residuals)
