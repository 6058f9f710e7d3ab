"""Dense operator arithmetic and Hilbert-Schmidt geometry.

Every operator in the package is a square ``complex128`` numpy array.  The
tensor ordering is fixed as ``system (x) accessor``: the left factor of
:func:`kron` is the slow index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class NotSkewHermitianError(ValueError):
    """An element offered to a Lie basis is not traceless skew-Hermitian."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds shared by the closure engine and the certificates.

    independence_tol
        Relative residual norm (residual / candidate norm) at or below which a
        candidate is treated as linearly dependent on a basis.
    verify_tol
        Relative Frobenius error allowed when a certificate or a membership
        claim is checked.
    hermiticity_tol
        Relative tolerance of the Hermitian / skew-Hermitian / traceless
        predicates.
    """

    independence_tol: float = 1e-9
    verify_tol: float = 1e-8
    hermiticity_tol: float = 1e-10

    def __post_init__(self):
        for name in ("independence_tol", "verify_tol", "hermiticity_tol"):
            value = getattr(self, name)
            if not (value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if self.independence_tol >= 1:
            raise ValueError("independence_tol must be < 1")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    return a


def _same_dim(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    return a, b


def _scale(a):
    return max(1.0, float(np.linalg.norm(a)))


def is_hermitian(a, tol=1e-10) -> bool:
    a = as_matrix(a)
    return float(np.linalg.norm(a - a.conj().T)) <= tol * _scale(a)


def is_skew_hermitian(a, tol=1e-10) -> bool:
    a = as_matrix(a)
    return float(np.linalg.norm(a + a.conj().T)) <= tol * _scale(a)


def is_traceless(a, tol=1e-10) -> bool:
    a = as_matrix(a)
    return abs(np.trace(a)) <= tol * _scale(a)


def kron(a, b) -> np.ndarray:
    """Tensor product with ``a`` as the slow (left, system) factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def commutator(a, b) -> np.ndarray:
    """``ab - ba``."""
    a, b = _same_dim(a, b)
    return a @ b - b @ a


def hs_inner(a, b) -> float:
    """Real Hilbert-Schmidt inner product ``Re tr(a^dagger b)``."""
    a, b = _same_dim(a, b)
    return float(np.vdot(a, b).real)


def hs_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a)))


def project_traceless(a) -> np.ndarray:
    a = as_matrix(a)
    d = a.shape[0]
    return a - (np.trace(a) / d) * np.eye(d, dtype=np.complex128)


def to_real_vector(a) -> np.ndarray:
    """Flatten a matrix into the real coordinates used for the HS geometry."""
    a = np.asarray(a, dtype=np.complex128)
    return np.concatenate([a.real.ravel(), a.imag.ravel()])


def from_real_vector(v, dim) -> np.ndarray:
    half = dim * dim
    return (v[:half] + 1j * v[half:]).reshape(dim, dim)


@dataclass
class InsertResult:
    accepted: bool
    residual: float
    index: int | None = None


@dataclass
class LieBasis:
    """Orthonormal (real HS product) set of traceless skew-Hermitian matrices.

    ``provenance[i]`` is ``"seed"`` for inserted generators or the pair of
    parent indices ``(p, q)`` whose commutator produced element ``i``.
    """

    dim_ambient: int
    elements: list = field(default_factory=list)
    provenance: list = field(default_factory=list)

    def __post_init__(self):
        self._rows = np.zeros((0, 2 * self.dim_ambient**2))
        if self.elements:
            self._rows = np.array([to_real_vector(e) for e in self.elements])

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, i):
        return self.elements[i]

    @property
    def rows(self) -> np.ndarray:
        """Real coordinate vectors of the elements, one per row."""
        return self._rows

    def stack(self) -> np.ndarray:
        if not self.elements:
            return np.zeros((0, self.dim_ambient, self.dim_ambient), dtype=np.complex128)
        return np.array(self.elements)

    def gram(self) -> np.ndarray:
        return self._rows @ self._rows.T

    def _append(self, vec, source):
        self.elements.append(from_real_vector(vec, self.dim_ambient))
        self.provenance.append(source)
        self._rows = np.vstack([self._rows, vec[None, :]])

    def projection_residual(self, v) -> np.ndarray:
        """Residual of a real coordinate vector after projection onto the span.

        Modified Gram-Schmidt followed by one full re-orthogonalisation pass.
        """
        r = np.array(v, dtype=float)
        for _ in range(2):
            for row in self._rows:
                r -= (row @ r) * row
        return r


def check_element(a, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    a = as_matrix(a)
    if not is_skew_hermitian(a, tol.hermiticity_tol):
        raise NotSkewHermitianError("candidate is not skew-Hermitian")
    if not is_traceless(a, tol.hermiticity_tol):
        raise NotSkewHermitianError("candidate is not traceless")
    return a


def orthonormal_insert(basis: LieBasis, candidate, tol: ToleranceConfig = DEFAULT_TOL,
                       source="seed") -> InsertResult:
    """Try to extend ``basis`` by ``candidate``.

    The candidate is projected against every basis element; if the relative
    residual norm exceeds ``tol.independence_tol`` the normalised residual is
    appended.  The decision depends only on the direction of the candidate.
    """
    candidate = as_matrix(candidate)
    if candidate.shape[0] != basis.dim_ambient:
        raise DimensionError(
            f"dimension mismatch: {candidate.shape[0]} vs {basis.dim_ambient}")
    norm = float(np.linalg.norm(candidate))
    if norm == 0.0:
        raise ValueError("zero candidate")
    # checked on the unit direction so the test does not depend on scale
    v = to_real_vector(check_element(candidate / norm, tol))
    r = basis.projection_residual(v)
    residual = float(np.linalg.norm(r))
    if residual <= tol.independence_tol:
        return InsertResult(False, residual)
    basis._append(r / residual, source)
    return InsertResult(True, residual, len(basis) - 1)
