from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DEFAULT_SAMPLES, DEFAULT_TOL
from .errors import DimensionMismatch, InvalidForm, NotFlat
from .pseudo_linear import QuadSpace, Subspace, null_space, numerical_rank

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class BilinearMap:
    """φ: V × V → W stored as ``tensor[i, j] = φ(e_i, e_j)``."""

    tensor: np.ndarray
    target: QuadSpace
    domain: QuadSpace | None = None

    def __post_init__(self) -> None:
        tensor = np.array(self.tensor, dtype=float)
        if tensor.ndim != 3 or tensor.shape[0] != tensor.shape[1]:
            raise DimensionMismatch(f"tensor must have shape (n, n, m), got {tensor.shape}")
        if tensor.shape[2] != self.target.dim:
            raise DimensionMismatch(
                f"tensor values have length {tensor.shape[2]}, target dimension is {self.target.dim}"
            )
        domain = self.domain or QuadSpace.euclidean(tensor.shape[0])
        if domain.dim != tensor.shape[0]:
            raise DimensionMismatch(f"domain dimension {domain.dim} does not match tensor {tensor.shape}")
        tensor.setflags(write=False)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "domain", domain)

    @classmethod
    def zero(cls, domain_dim: int, target: QuadSpace) -> BilinearMap:
        return cls(np.zeros((domain_dim, domain_dim, target.dim)), target)

    @classmethod
    def from_function(
        cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], domain_dim: int, target: QuadSpace
    ) -> BilinearMap:
        eye = np.eye(domain_dim)
        tensor = np.array([[fn(eye[i], eye[j]) for j in range(domain_dim)] for i in range(domain_dim)])
        return cls(tensor.reshape(domain_dim, domain_dim, target.dim), target)

    @property
    def domain_dim(self) -> int:
        return int(self.tensor.shape[0])

    def entry_scale(self) -> float:
        """1 + the largest coordinate norm of a basis value."""
        if self.tensor.size == 0:
            return 1.0
        return 1.0 + float(np.linalg.norm(self.tensor, axis=2).max())

    def symmetry_defect(self) -> float:
        return float(np.abs(self.tensor - self.tensor.transpose(1, 0, 2)).max(initial=0.0))


def _vector(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (n,):
        raise DimensionMismatch(f"expected a vector of length {n}, got shape {x.shape}")
    return x


def evaluate(phi: BilinearMap, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    n = phi.domain_dim
    return np.einsum("i,j,ijk->k", _vector(x, n), _vector(y, n), phi.tensor)


def image_span(phi: BilinearMap, tol: float = DEFAULT_TOL) -> Subspace:
    n, m = phi.domain_dim, phi.target.dim
    return Subspace.span(phi.target, phi.tensor.reshape(n * n, m).T, tol)


def right_kernel(phi: BilinearMap, tol: float = DEFAULT_TOL) -> Subspace:
    """{Y : φ(X, Y) = 0 for all X}."""
    n, m = phi.domain_dim, phi.target.dim
    stacked = phi.tensor.transpose(0, 2, 1).reshape(n * m, n)
    return Subspace(phi.domain, null_space(stacked, tol))


def left_kernel(phi: BilinearMap, tol: float = DEFAULT_TOL) -> Subspace:
    """{X : φ(X, Y) = 0 for all Y}; agrees with :func:`right_kernel` for
    symmetric forms and for forms with the β-symmetries."""
    n, m = phi.domain_dim, phi.target.dim
    stacked = phi.tensor.transpose(1, 2, 0).reshape(n * m, n)
    return Subspace(phi.domain, null_space(stacked, tol))


@dataclass(frozen=True, eq=False)
class LeftMap:
    """Matrix of φ_X: Y ↦ φ(X, Y), shape (target dim, domain dim)."""

    matrix: np.ndarray
    domain: QuadSpace
    target: QuadSpace

    def rank(self, tol: float = DEFAULT_TOL) -> int:
        return numerical_rank(self.matrix, tol)

    def kernel(self, tol: float = DEFAULT_TOL) -> Subspace:
        return Subspace(self.domain, null_space(self.matrix, tol))

    def image(self, tol: float = DEFAULT_TOL) -> Subspace:
        return Subspace.span(self.target, self.matrix, tol)


def left_map(phi: BilinearMap, X: np.ndarray) -> LeftMap:
    X = _vector(X, phi.domain_dim)
    return LeftMap(np.einsum("i,ijk->kj", X, phi.tensor), phi.domain, phi.target)


@dataclass(frozen=True, eq=False)
class FlatnessReport:
    max_defect: float
    worst_tuple: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    is_flat: bool
    tolerance: float


def flatness_report(phi: BilinearMap, tol: float = DEFAULT_TOL) -> FlatnessReport:
    """Max over basis 4-tuples of |⟨φ(X,Y),φ(Z,T)⟩ − ⟨φ(X,T),φ(Z,Y)⟩|.

    The tolerance is relative: ``tol * entry_scale() ** 2``.
    """
    T = phi.tensor
    products = np.einsum("ija,ab,klb->ijkl", T, phi.target.gram, T)
    defect = np.abs(products - products.transpose(0, 3, 2, 1))
    idx = np.unravel_index(int(np.argmax(defect)), defect.shape)
    eye = np.eye(phi.domain_dim)
    worst = tuple(eye[i].copy() for i in idx)
    max_defect = float(defect[idx])
    tolerance = tol * phi.entry_scale() ** 2
    return FlatnessReport(max_defect, worst, max_defect <= tolerance, tolerance)


def find_regular_element(
    phi: BilinearMap,
    seed: int = 0,
    samples: int = DEFAULT_SAMPLES,
    tol: float = DEFAULT_TOL,
) -> tuple[np.ndarray, int]:
    """Element of maximal left-map rank among ``samples`` seeded random unit
    vectors followed by the basis vectors; the first maximizer wins."""
    if samples < 1:
        raise InvalidForm("samples must be at least 1")
    n = phi.domain_dim
    rng = np.random.default_rng(seed)
    random = rng.standard_normal((samples, n))
    random /= np.linalg.norm(random, axis=1, keepdims=True)
    candidates = np.vstack([random, np.eye(n)])
    ranks = [left_map(phi, c).rank(tol) for c in candidates]
    best = int(np.argmax(ranks))
    logger.debug("regular element: rank %d from candidate %d of %d", ranks[best], best, len(candidates))
    return candidates[best].copy(), int(ranks[best])


def moore_verify(phi: BilinearMap, X: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """Defect of 𝒮(φ|V×ker φ_X) ⊂ φ_X(V) ∩ φ_X(V)⊥.

    Returns the larger of the scaled orthogonality defect and the containment
    defect of the normalized generators; zero when the inclusion holds.
    """
    report = flatness_report(phi, tol)
    if not report.is_flat:
        raise NotFlat(f"form is not flat: defect {report.max_defect:.3e} > {report.tolerance:.3e}")
    B = left_map(phi, X)
    kernel = B.kernel(tol)
    if kernel.rank == 0:
        return 0.0
    m = phi.target.dim
    generators = np.einsum("ijk,jb->ibk", phi.tensor, kernel.basis).reshape(-1, m).T
    orthogonality = float(np.abs(generators.T @ phi.target.gram @ B.matrix).max()) / phi.entry_scale() ** 2
    containment = B.image(tol).containment_defect(generators)
    return max(orthogonality, containment)


def restrict(phi: BilinearMap, basis: np.ndarray) -> BilinearMap:
    """φ on span(basis), in the coordinates given by the columns of ``basis``."""
    B = np.asarray(basis, dtype=float)
    tensor = np.einsum("ia,jb,ijk->abk", B, B, phi.tensor)
    return BilinearMap(tensor, phi.target, QuadSpace(B.T @ phi.domain.gram @ B))


def map_values(phi: BilinearMap, matrix: np.ndarray, target: QuadSpace | None = None) -> BilinearMap:
    """Compose the values of φ with a linear map given by ``matrix``."""
    matrix = np.asarray(matrix, dtype=float)
    target = target or phi.target
    return BilinearMap(np.einsum("ijk,lk->ijl", phi.tensor, matrix), target, phi.domain)
