"""POVMs: construction, validation, rank-one extremality, projection onto a subspace."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .linalg import dag, is_hermitian, ket, perp_of_conjugate, proj

SQ3 = np.sqrt(3)


class NotAProjectorError(ValueError):
    pass


@dataclass(frozen=True)
class Povm:
    elements: tuple

    def __post_init__(self):
        els = tuple(np.array(e, dtype=complex) for e in self.elements)
        if not els:
            raise ValueError("a POVM needs at least one element")
        d = els[0].shape
        if any(e.shape != d or len(d) != 2 or d[0] != d[1] for e in els):
            raise ValueError("POVM elements must be square matrices of equal size")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, a):
        return self.elements[a]

    def conjugated(self, u: np.ndarray) -> "Povm":
        return Povm(tuple(u @ e @ dag(u) for e in self.elements))


@dataclass(frozen=True)
class MeasurementSet:
    """Three settings of a measurement, indexed by setting; each a :class:`Povm`."""

    povms: tuple

    def __post_init__(self):
        povms = tuple(p if isinstance(p, Povm) else Povm(p) for p in self.povms)
        if len({p.dim for p in povms}) != 1:
            raise ValueError("all settings must act on the same space")
        object.__setattr__(self, "povms", povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def n_outcomes(self) -> int:
        return len(self.povms[0])

    def __len__(self):
        return len(self.povms)

    def __getitem__(self, x):
        return self.povms[x]

    def __iter__(self):
        return iter(self.povms)

    def array(self) -> np.ndarray:
        """Elements stacked as an array indexed (setting, outcome, row, col)."""
        return np.array([[e for e in p.elements] for p in self.povms])

    def conjugated(self, u: np.ndarray) -> "MeasurementSet":
        return MeasurementSet(tuple(p.conjugated(u) for p in self.povms))


def alice_vectors() -> np.ndarray:
    """The nine trine vectors, indexed [x, a] (setting first)."""
    s2 = np.sqrt(2)
    e = np.array(
        [
            [[1, 0], [1 / 2, SQ3 / 2], [1 / 2, -SQ3 / 2]],
            [[0, 1], [SQ3 / 2, 1j / 2], [SQ3 / 2, -1j / 2]],
            [
                [1 / s2, 1j / s2],
                [1 / s2, np.exp(7j * np.pi / 6) / s2],
                [1 / s2, np.exp(-1j * np.pi / 6) / s2],
            ],
        ],
        dtype=complex,
    )
    return e


def bob_vectors() -> np.ndarray:
    """|f_{a,x}>, orthogonal to the conjugate of each trine vector; indexed [x, a]."""
    e = alice_vectors()
    return np.array([[perp_of_conjugate(e[x, a]) for a in range(3)] for x in range(3)])


def _trine_set(vectors: np.ndarray) -> MeasurementSet:
    return MeasurementSet(tuple(Povm(tuple(2 / 3 * proj(ket(v)) for v in row)) for row in vectors))


def alice_ideal() -> MeasurementSet:
    return _trine_set(alice_vectors())


def bob_ideal() -> MeasurementSet:
    return _trine_set(bob_vectors())


@dataclass(frozen=True)
class Violation:
    element: int | None  # None for whole-POVM checks such as completeness
    predicate: str
    magnitude: float

    def __str__(self):
        where = "povm" if self.element is None else f"element {self.element}"
        return f"{where}: {self.predicate} violated by {self.magnitude:.3g}"


def validate(p: Povm, atol: float = tol.DECOMPOSITION, allow_zero: bool = False) -> list:
    """Every way ``p`` fails to be a POVM; empty when it is one."""
    out = []
    for i, e in enumerate(p.elements):
        herm = np.abs(e - dag(e)).max()
        if herm > atol:
            out.append(Violation(i, "hermitian", float(herm)))
        lo = np.linalg.eigvalsh((e + dag(e)) / 2)[0]
        if lo < -atol:
            out.append(Violation(i, "psd", float(-lo)))
        if not allow_zero and np.abs(e).max() <= atol:
            out.append(Violation(i, "nonzero", 0.0))
    deficit = np.linalg.norm(sum(p.elements) - np.eye(p.dim))
    if deficit > atol:
        out.append(Violation(None, "completeness", float(deficit)))
    return out


def validate_set(m: MeasurementSet, **kwargs) -> list:
    """Violations for every setting, as (setting, Violation) pairs."""
    return [(x, v) for x, p in enumerate(m) for v in validate(p, **kwargs)]


@dataclass(frozen=True)
class ExtremalityReport:
    applicable: bool
    extremal: bool | None  # None when not applicable
    matrix_rank: int
    element_ranks: list = field(default_factory=list)


def element_rank(e: np.ndarray) -> int:
    w = np.linalg.eigvalsh((e + dag(e)) / 2)[::-1]
    cut = tol.RANK_CUTOFF * (w[0] + 1)
    return int(np.sum(w > cut))


def check_extremality(p: Povm) -> ExtremalityReport:
    """Extremality for POVMs with rank-one elements: linear independence of the elements.

    Higher-rank elements are outside what this test decides; the report then
    has ``applicable=False`` and ``extremal=None``.
    """
    ranks = [element_rank(e) for e in p.elements]
    flat = np.array([e.reshape(-1) for e in p.elements])
    sv = np.linalg.svd(flat, compute_uv=False)
    rank = int(np.sum(sv > tol.RANK_CUTOFF))
    if any(r != 1 for r in ranks):
        return ExtremalityReport(False, None, rank, ranks)
    return ExtremalityReport(True, rank == len(p), rank, ranks)


def support_basis(projector: np.ndarray, atol: float = tol.DECOMPOSITION) -> np.ndarray:
    """Orthonormal columns spanning the range of ``projector``.

    Built by Gram-Schmidt on projector @ e_i in index order, so a projector onto
    coordinate axes returns those axes.
    """
    pr = np.asarray(projector, dtype=complex)
    if not is_hermitian(pr, atol) or not np.allclose(pr @ pr, pr, rtol=0, atol=atol):
        raise NotAProjectorError("matrix is not an orthogonal projector")
    rank = int(round(np.trace(pr).real))
    cols = []
    for i in range(pr.shape[0]):
        if len(cols) == rank:
            break
        v = pr[:, i].copy()
        for c in cols:
            v = v - (c.conj() @ v) * c
        n = np.linalg.norm(v)
        if n > 1e-6:
            cols.append(v / n)
    return np.column_stack(cols)


def project_povm(p: Povm, projector: np.ndarray) -> list:
    """Compress each element to the support of ``projector``: V^dag N V, V spanning the support."""
    v = support_basis(projector)
    return [dag(v) @ e @ v for e in p.elements]
