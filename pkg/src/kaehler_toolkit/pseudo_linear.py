"""Subspace calculus in real vector spaces carrying a symmetric, possibly
indefinite, inner product.

Every rank decision in the package goes through :func:`numerical_rank`:
singular values at or below ``tol * max(1, sigma_max)`` count as zero.
Bases are stored as matrices whose columns are orthonormal in plain
coordinates; the indefinite Gram is applied on top of them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg

from .config import DEFAULT_TOL
from .errors import DecompositionFailed, DimensionMismatch, InvalidForm, NoNullVector

logger = logging.getLogger(__name__)


def _cutoff(singular_values: np.ndarray, tol: float) -> float:
    if singular_values.size == 0:
        return 0.0
    return tol * max(1.0, float(singular_values[0]))


def numerical_rank(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> int:
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.size == 0:
        return 0
    s = linalg.svd(m, compute_uv=False)
    return int(np.count_nonzero(s > _cutoff(s, tol)))


def column_span(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the column space of ``matrix``."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = linalg.svd(m, full_matrices=False)
    r = int(np.count_nonzero(s > _cutoff(s, tol)))
    return u[:, :r]


def null_space(matrix: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of ``{x : matrix @ x = 0}``."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim == 1:
        m = m[None, :]
    n = m.shape[1]
    if m.size == 0:
        return np.eye(n)
    _, s, vh = linalg.svd(m, full_matrices=True)
    r = int(np.count_nonzero(s > _cutoff(s, tol)))
    return vh[r:].T.copy()


@dataclass(frozen=True, eq=False)
class QuadSpace:
    """A finite-dimensional real space with a fixed nondegenerate symmetric
    inner product, given by its Gram matrix in the standard basis."""

    gram: np.ndarray
    signature: tuple[int, int] = field(init=False)

    def __post_init__(self) -> None:
        gram = np.array(self.gram, dtype=float)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] == 0:
            raise InvalidForm(f"Gram matrix must be square and nonempty, got shape {gram.shape}")
        scale = max(1.0, float(np.abs(gram).max()))
        if np.abs(gram - gram.T).max() > DEFAULT_TOL * scale:
            raise InvalidForm("Gram matrix is not symmetric")
        gram = 0.5 * (gram + gram.T)
        gram.setflags(write=False)

        eigenvalues = linalg.eigvalsh(gram)
        cut = DEFAULT_TOL * max(1.0, float(np.abs(eigenvalues).max()))
        n_plus = int(np.count_nonzero(eigenvalues > cut))
        n_minus = int(np.count_nonzero(eigenvalues < -cut))
        if n_plus + n_minus != gram.shape[0]:
            raise InvalidForm("ambient inner product is degenerate")

        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "signature", (n_plus, n_minus))

    @classmethod
    def from_diagonal(cls, values: Sequence[float]) -> QuadSpace:
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def euclidean(cls, dim: int) -> QuadSpace:
        return cls(np.eye(dim))

    @classmethod
    def lorentzian(cls, dim: int) -> QuadSpace:
        # time-like direction is the last coordinate
        return cls.from_diagonal([1.0] * (dim - 1) + [-1.0])

    @classmethod
    def split(cls, p: int) -> QuadSpace:
        return cls.from_diagonal([1.0] * p + [-1.0] * p)

    @property
    def dim(self) -> int:
        return int(self.gram.shape[0])

    def inner(self, x: np.ndarray, y: np.ndarray) -> float:
        return inner(self, x, y)


def inner(space: QuadSpace, x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (space.dim,) or y.shape != (space.dim,):
        raise DimensionMismatch(
            f"expected vectors of length {space.dim}, got shapes {x.shape} and {y.shape}"
        )
    return float(x @ space.gram @ y)


@dataclass(frozen=True, eq=False)
class Subspace:
    ambient: QuadSpace
    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.array(self.basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.shape[0] != self.ambient.dim:
            raise DimensionMismatch(
                f"basis vectors have length {basis.shape[0]}, ambient dimension is {self.ambient.dim}"
            )
        if basis.shape[1]:
            if numerical_rank(basis) != basis.shape[1]:
                raise InvalidForm("subspace basis vectors are linearly dependent")
            if np.abs(basis.T @ basis - np.eye(basis.shape[1])).max() > 1e-12:
                basis, _ = np.linalg.qr(basis, mode="reduced")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, ambient: QuadSpace, columns: np.ndarray, tol: float = DEFAULT_TOL) -> Subspace:
        """Span of the columns of ``columns`` (dependent columns allowed)."""
        m = np.asarray(columns, dtype=float).reshape(ambient.dim, -1)
        return cls(ambient, column_span(m, tol))

    @classmethod
    def from_vectors(
        cls, ambient: QuadSpace, vectors: Sequence[Sequence[float]], tol: float = DEFAULT_TOL
    ) -> Subspace:
        if len(vectors) == 0:
            return cls.zero(ambient)
        return cls.span(ambient, np.column_stack([np.asarray(v, dtype=float) for v in vectors]), tol)

    @classmethod
    def zero(cls, ambient: QuadSpace) -> Subspace:
        return cls(ambient, np.zeros((ambient.dim, 0)))

    @classmethod
    def full(cls, ambient: QuadSpace) -> Subspace:
        return cls(ambient, np.eye(ambient.dim))

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])

    @property
    def ambient_dim(self) -> int:
        return self.ambient.dim

    def gram(self) -> np.ndarray:
        """Induced inner product in the stored basis."""
        return self.basis.T @ self.ambient.gram @ self.basis

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def is_degenerate(self, tol: float = DEFAULT_TOL) -> bool:
        return self.rank > 0 and numerical_rank(self.gram(), tol) < self.rank

    def signature(self, tol: float = DEFAULT_TOL) -> tuple[int, int]:
        if self.rank == 0:
            return (0, 0)
        eigenvalues = linalg.eigvalsh(self.gram())
        cut = tol * max(1.0, float(np.abs(eigenvalues).max()))
        return int(np.count_nonzero(eigenvalues > cut)), int(np.count_nonzero(eigenvalues < -cut))

    def contains(self, other: Subspace | np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        cols = _columns(self.ambient, other)
        if cols.shape[1] == 0:
            return True
        return numerical_rank(np.hstack([self.basis, cols]), tol) == self.rank

    def equals(self, other: Subspace, tol: float = DEFAULT_TOL) -> bool:
        return self.rank == other.rank and self.contains(other, tol) and other.contains(self, tol)

    def containment_defect(self, other: Subspace | np.ndarray) -> float:
        """Largest coordinate residual of the normalized columns of ``other``
        after projecting onto this subspace."""
        cols = _columns(self.ambient, other)
        if cols.shape[1] == 0:
            return 0.0
        norms = np.linalg.norm(cols, axis=0)
        keep = norms > 0
        if not np.any(keep):
            return 0.0
        unit = cols[:, keep] / norms[keep]
        residual = unit - self.projector() @ unit
        return float(np.linalg.norm(residual, axis=0).max())

    def span_defect(self, other: Subspace) -> float:
        if self.rank != other.rank:
            return 1.0
        return max(self.containment_defect(other), other.containment_defect(self))

    def direct_sum(self, other: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
        return Subspace.span(self.ambient, np.hstack([self.basis, other.basis]), tol)


def _columns(ambient: QuadSpace, other: Subspace | np.ndarray) -> np.ndarray:
    if isinstance(other, Subspace):
        return other.basis
    cols = np.asarray(other, dtype=float)
    if cols.ndim == 1:
        cols = cols[:, None]
    if cols.shape[0] != ambient.dim:
        raise DimensionMismatch(f"vectors have length {cols.shape[0]}, ambient dimension is {ambient.dim}")
    return cols


def _check_ambient(space: QuadSpace, L: Subspace) -> None:
    if L.ambient.dim != space.dim:
        raise DimensionMismatch(f"subspace lives in dimension {L.ambient.dim}, space has {space.dim}")


def orthogonal_complement(space: QuadSpace, L: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    _check_ambient(space, L)
    if L.rank == 0:
        return Subspace.full(space)
    return Subspace(space, null_space(L.basis.T @ space.gram, tol))


def radical(space: QuadSpace, L: Subspace, tol: float = DEFAULT_TOL) -> Subspace:
    """L ∩ L⊥."""
    _check_ambient(space, L)
    if L.rank == 0:
        return Subspace.zero(space)
    coeffs = null_space(L.basis.T @ space.gram @ L.basis, tol)
    return Subspace.span(space, L.basis @ coeffs, tol)


@dataclass(frozen=True, eq=False)
class RadicalDecomposition:
    """W = U ⊕ Û ⊕ V with U the radical of L, Û isotropic and paired with U,
    and V = (U ⊕ Û)⊥ nondegenerate."""

    radical: Subspace
    isotropic_complement: Subspace
    nondeg_part: Subspace
    radical_vectors: np.ndarray
    dual_vectors: np.ndarray

    def pairing_defect(self) -> float:
        gram = self.radical.ambient.gram
        u, d = self.radical_vectors, self.dual_vectors
        if u.shape[1] == 0:
            return 0.0
        k = u.shape[1]
        return float(
            max(
                np.abs(u.T @ gram @ d - np.eye(k)).max(),
                np.abs(d.T @ gram @ d).max(),
                np.abs(u.T @ gram @ u).max(),
            )
        )

    def cross_defect(self) -> float:
        """Largest inner product between U ⊕ Û and V."""
        gram = self.radical.ambient.gram
        paired = np.hstack([self.radical_vectors, self.dual_vectors])
        if paired.shape[1] == 0 or self.nondeg_part.rank == 0:
            return 0.0
        return float(np.abs(paired.T @ gram @ self.nondeg_part.basis).max())


def decompose_degenerate(space: QuadSpace, L: Subspace, tol: float = DEFAULT_TOL) -> RadicalDecomposition:
    _check_ambient(space, L)
    U = radical(space, L, tol)
    k = U.rank
    if k == 0:
        empty = np.zeros((space.dim, 0))
        return RadicalDecomposition(U, Subspace.zero(space), Subspace.full(space), empty, empty)

    # L = U ⊕ L' with L' nondegenerate; Û is built inside L'⊥ so that L' ⊆ V.
    nondeg_coeffs = null_space(U.basis.T @ L.basis, tol)
    L_prime = Subspace(space, L.basis @ nondeg_coeffs)
    M = orthogonal_complement(space, L_prime, tol)

    pairing = U.basis.T @ space.gram @ M.basis
    if numerical_rank(pairing, tol) < k:
        raise DecompositionFailed("radical cannot be paired inside the complement of L")
    coeffs, *_ = np.linalg.lstsq(pairing, np.eye(k), rcond=None)
    Y = M.basis @ coeffs
    H = Y.T @ space.gram @ Y
    dual = Y - 0.5 * U.basis @ H

    paired = Subspace.span(space, np.hstack([U.basis, dual]), tol)
    V = orthogonal_complement(space, paired, tol)
    result = RadicalDecomposition(U, Subspace.span(space, dual, tol), V, U.basis.copy(), dual)

    scale = max(1.0, float(np.abs(space.gram).max())) * max(1.0, float(np.abs(dual).max())) ** 2
    if 2 * k + V.rank != space.dim:
        raise DecompositionFailed(f"parts do not span the space: 2*{k} + {V.rank} != {space.dim}")
    if V.is_degenerate(tol):
        raise DecompositionFailed("V is degenerate")
    if result.pairing_defect() > tol * scale or result.cross_defect() > tol * scale:
        raise DecompositionFailed("pairing or orthogonality identities fail at tolerance")
    if not U.direct_sum(V, tol).contains(L, tol):
        raise DecompositionFailed("L is not contained in U ⊕ V")
    logger.debug("decomposed subspace of rank %d: radical %d, V %d", L.rank, k, V.rank)
    return result


def _canonical_choice(candidates: list[np.ndarray], tol: float) -> np.ndarray:
    # Largest leading coordinate wins, then the lowest leading index; the
    # remaining coordinates only separate exact ties.
    best, best_key = None, None
    for c in candidates:
        c = c / np.linalg.norm(c)
        nonzero = np.flatnonzero(np.abs(c) > tol)
        if nonzero.size == 0:
            continue
        lead = int(nonzero[0])
        if c[lead] < 0:
            c = -c
        key = (round(float(c[lead]), 12), -lead, tuple(np.round(c, 12)))
        if best_key is None or key > best_key:
            best, best_key = c, key
    if best is None:
        raise NoNullVector("no nonzero candidate direction")
    return best


def find_lightlike(space: QuadSpace, S: Subspace, tol: float = DEFAULT_TOL) -> np.ndarray:
    """A unit-coordinate null vector of S.

    Degenerate S yields a radical direction. Otherwise the two null rays built
    from the extreme eigenvectors of the induced form are candidates. Each is
    signed so its first nonzero coordinate is positive, and the one with the
    largest such coordinate wins; ties go to the lowest index.
    """
    _check_ambient(space, S)
    if S.rank == 0:
        raise NoNullVector("zero subspace has no nonzero null vector")
    rad = radical(space, S, tol)
    if rad.rank > 0:
        return _canonical_choice(list(rad.basis.T), tol)

    eigenvalues, eigenvectors = linalg.eigh(S.gram())
    cut = tol * max(1.0, float(np.abs(eigenvalues).max()))
    if eigenvalues[0] > -cut or eigenvalues[-1] < cut:
        raise NoNullVector("induced inner product is definite")
    plus = eigenvectors[:, -1] / np.sqrt(eigenvalues[-1])
    minus = eigenvectors[:, 0] / np.sqrt(-eigenvalues[0])
    return _canonical_choice([S.basis @ (plus + minus), S.basis @ (plus - minus)], tol)


def orthonormal_frame(space: QuadSpace, L: Subspace, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Columns spanning L with induced Gram diag(+1, ..., +1, -1, ..., -1)."""
    _check_ambient(space, L)
    if L.rank == 0:
        return np.zeros((space.dim, 0))
    eigenvalues, eigenvectors = linalg.eigh(L.gram())
    cut = tol * max(1.0, float(np.abs(eigenvalues).max()))
    if np.any(np.abs(eigenvalues) <= cut):
        raise DecompositionFailed("cannot build an orthonormal frame of a degenerate subspace")
    order = np.argsort(-eigenvalues, kind="stable")
    coeffs = eigenvectors[:, order] / np.sqrt(np.abs(eigenvalues[order]))
    return L.basis @ coeffs
