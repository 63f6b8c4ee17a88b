"""Small dense complex linear algebra for qubit-by-qudit systems.

Operators and kets are plain numpy arrays (complex128). The only wrapper type
is :class:`SchmidtForm`; everything else is a function on arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def _as_complex(a) -> np.ndarray:
    arr = np.array(a, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite entries")
    return arr


def ket(amplitudes, normalize: bool = False) -> np.ndarray:
    """Return a unit-norm complex vector.

    With ``normalize=False`` the input must already have norm 1 within
    ``tolerances.CONSTRUCTION``; otherwise it is rescaled.
    """
    v = _as_complex(amplitudes).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector cannot be a ket")
    if normalize:
        return v / n
    if abs(n - 1) > tol.CONSTRUCTION:
        raise ValueError(f"ket norm {n!r} differs from 1")
    return v


def basis(dim: int, i: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1
    return v


def proj(v: np.ndarray) -> np.ndarray:
    return np.outer(v, v.conj())


def dag(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def phi_plus() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def is_hermitian(m: np.ndarray, atol: float = tol.DECOMPOSITION) -> bool:
    return m.shape[0] == m.shape[1] and np.allclose(m, dag(m), rtol=0, atol=atol)


def is_psd(m: np.ndarray, atol: float = tol.DECOMPOSITION) -> bool:
    return is_hermitian(m, atol) and np.linalg.eigvalsh((m + dag(m)) / 2)[0] >= -atol


def is_identity(m: np.ndarray, atol: float = tol.DECOMPOSITION) -> bool:
    return m.shape[0] == m.shape[1] and np.allclose(m, np.eye(m.shape[0]), rtol=0, atol=atol)


def is_unitary(m: np.ndarray, atol: float = tol.DECOMPOSITION) -> bool:
    return is_identity(dag(m) @ m, atol)


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; entry (i*rb + k, j*cb + l) is a[i, j] * b[k, l]."""
    return np.kron(a, b)


def _split(m: np.ndarray, dim_a: int, dim_b: int) -> np.ndarray:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] != dim_a * dim_b:
        raise DimensionError(f"size {m.shape[0]} does not factor as {dim_a}*{dim_b}")
    return m.reshape(dim_a, dim_b, dim_a, dim_b)


def partial_trace_a(m: np.ndarray, dim_a: int = 2, dim_b: int | None = None) -> np.ndarray:
    """Trace out the first factor: result[k, l] = sum_i m[(i,k), (i,l)]."""
    if dim_b is None:
        dim_b = m.shape[0] // dim_a
    return np.einsum("ikil->kl", _split(m, dim_a, dim_b))


def partial_trace_b(m: np.ndarray, dim_a: int = 2, dim_b: int | None = None) -> np.ndarray:
    """Trace out the second factor: result[i, j] = sum_k m[(i,k), (j,k)]."""
    if dim_b is None:
        dim_b = m.shape[0] // dim_a
    return np.einsum("ikjk->ij", _split(m, dim_a, dim_b))


def eig_hermitian(m: np.ndarray, atol: float = tol.DECOMPOSITION):
    """Ascending eigenvalues and orthonormal eigenvectors (as columns)."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m, atol):
        raise NotHermitianError("matrix is not Hermitian")
    w, v = np.linalg.eigh((m + dag(m)) / 2)
    return w, v


def canonical_phase(v: np.ndarray, atol: float = tol.CONSTRUCTION) -> np.ndarray:
    """Rotate the global phase so the first nonzero amplitude is real positive."""
    for amp in v:
        if abs(amp) > atol:
            return v * (abs(amp) / amp)
    return v


def conjugate(k: np.ndarray) -> np.ndarray:
    return np.conj(k)


def orthogonal_complement_qubit(k: np.ndarray) -> np.ndarray:
    """The unit qubit vector orthogonal to ``k``, phase-canonicalized."""
    if k.shape != (2,):
        raise DimensionError("orthogonal complement is defined for qubits only")
    k = ket(k, normalize=True)
    return canonical_phase(np.array([-np.conj(k[1]), np.conj(k[0])]))


def perp_of_conjugate(k: np.ndarray) -> np.ndarray:
    """|k*perp>: the qubit vector orthogonal to the complex conjugate of ``k``."""
    return orthogonal_complement_qubit(conjugate(k))


@dataclass(frozen=True)
class SchmidtForm:
    coefficients: np.ndarray  # descending
    left: tuple  # kets on the qubit factor
    right: tuple  # kets on the second factor

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(s, t) for c, s, t in zip(self.coefficients, self.left, self.right))


def schmidt_decompose(psi: np.ndarray, dim_a: int = 2) -> SchmidtForm:
    """Schmidt form of a pure state on C^dim_a (x) C^d.

    Diagonalizes the reduced state of the first factor, then recovers each
    right vector as (<s_i| (x) 1)|psi> / lambda_i.
    """
    psi = ket(psi)
    if psi.size % dim_a:
        raise DimensionError(f"state of size {psi.size} does not split as {dim_a}*d")
    mat = psi.reshape(dim_a, -1)
    rho_a = mat @ dag(mat)
    w, v = eig_hermitian(rho_a)
    order = np.argsort(w)[::-1]
    coeffs, left, right = [], [], []
    for i in order:
        lam = np.sqrt(max(w[i], 0.0))
        if lam <= tol.SCHMIDT_CUTOFF:
            continue
        s = canonical_phase(v[:, i])
        t = s.conj() @ mat / lam
        coeffs.append(lam)
        left.append(s)
        right.append(t / np.linalg.norm(t))
    return SchmidtForm(np.array(coeffs), tuple(left), tuple(right))


def complete_basis(vectors, dim: int) -> np.ndarray:
    """Columns: the given orthonormal vectors followed by a fixed orthonormal completion.

    The completion Gram-Schmidts the standard basis vectors in order, so it is
    deterministic for a given input.
    """
    cols = [np.asarray(v, dtype=complex) for v in vectors]
    for i in range(dim):
        if len(cols) == dim:
            break
        e = basis(dim, i)
        for c in cols:
            e = e - (c.conj() @ e) * c
        n = np.linalg.norm(e)
        if n > 1e-6:
            cols.append(e / n)
    return np.column_stack(cols)


def purify(rho: np.ndarray, dim_a: int = 2) -> np.ndarray:
    """Purification of a density matrix on C^dim_a (x) C^d into C^dim_a (x) C^(d*r).

    ``r`` is the rank of ``rho``; the ancilla is appended to the second factor.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = eig_hermitian(rho)
    keep = [i for i in range(len(w)) if w[i] > tol.DECOMPOSITION]
    r = len(keep)
    out = sum(np.sqrt(w[i]) * np.kron(v[:, i], basis(r, j)) for j, i in enumerate(keep))
    return ket(out, normalize=True)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dag(g)
    return rho / np.trace(rho).real


def random_ket(dim: int, rng: np.random.Generator) -> np.ndarray:
    return ket(rng.standard_normal(dim) + 1j * rng.standard_normal(dim), normalize=True)
