"""The forms β and γ attached to a symmetric form α with a complex structure J,
their span structure, degenerate splittings, curvature functionals and the
constructive diagonalization of flat β.

Conventions: α takes values in a Lorentzian space L^p whose distinguished
time-like unit w (when present) is the last coordinate; β and γ take values
in the doubled space W^{p,p} = L^p ⊕ L^p with inner product
⟨⟨(ξ,ξ̄),(η,η̄)⟩⟩ = ⟨ξ,η⟩ − ⟨ξ̄,η̄⟩.

    β(X,Y) = (α(X,Y) + α(JX,JY), α(X,JY) − α(JX,Y))
    γ(X,Y) = (α(X,Y), α(X,JY))
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .bilinear import (
    BilinearMap,
    evaluate,
    find_regular_element,
    flatness_report,
    image_span,
    left_map,
    map_values,
    restrict,
    right_kernel,
)
from .config import CURVATURE_SAMPLES, DEFAULT_SAMPLES, DEFAULT_TOL, HYPOTHESIS_SAMPLES
from .errors import (
    BadCorank,
    DegenerateSpan,
    DimensionMismatch,
    HypothesisViolated,
    InvalidForm,
    NotDegenerate,
    NotFlat,
    PlaneNotLorentzian,
    RecursionFailed,
    SearchFailed,
    ShapeIdViolation,
)
from .pseudo_linear import (
    QuadSpace,
    Subspace,
    column_span,
    find_lightlike,
    null_space,
    numerical_rank,
    radical,
)

logger = logging.getLogger(__name__)

_ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class ComplexStructure:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise InvalidForm(f"complex structure must be an even square matrix, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max())) ** 2
        if np.abs(m @ m + np.eye(m.shape[0])).max() > DEFAULT_TOL * scale:
            raise InvalidForm("J² ≠ −I")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def standard(cls, n: int) -> ComplexStructure:
        """J e_{2k} = e_{2k+1}, J e_{2k+1} = −e_{2k}."""
        return cls(linalg.block_diag(*([_ROTATION] * n)))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def isometry_defect(self, gram: np.ndarray) -> float:
        return float(np.abs(self.matrix.T @ gram @ self.matrix - gram).max())


@dataclass(frozen=True, eq=False)
class DoubledSpace:
    base: QuadSpace
    whole: QuadSpace

    @classmethod
    def over(cls, base: QuadSpace) -> DoubledSpace:
        return cls(base, QuadSpace(linalg.block_diag(base.gram, -base.gram)))

    def embed(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return np.concatenate([np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)])

    def doubled_subspace(self, U: Subspace) -> Subspace:
        """U ⊕ U inside the doubled space."""
        return Subspace.span(self.whole, linalg.block_diag(U.basis, U.basis))


@dataclass(frozen=True, eq=False)
class KaehlerPair:
    alpha: BilinearMap
    J: ComplexStructure
    domain_inner: QuadSpace
    beta: BilinearMap
    gamma: BilinearMap
    doubled: DoubledSpace
    w: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.J.dim // 2

    @property
    def p(self) -> int:
        return self.alpha.target.dim


def _at_j_right(J: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """tensor evaluated at (e_i, J e_j)."""
    return np.einsum("bj,ibk->ijk", J, tensor)


def _at_j_left(J: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """tensor evaluated at (J e_i, e_j)."""
    return np.einsum("ai,ajk->ijk", J, tensor)


def shape_identity_defect(alpha: BilinearMap, w: np.ndarray, domain: QuadSpace) -> float:
    """max |⟨α(e_i,e_j), w⟩ + (e_i,e_j)|."""
    pairing = np.einsum("ijk,k->ij", alpha.tensor, alpha.target.gram @ w)
    return float(np.abs(pairing + domain.gram).max())


def build_pair(
    alpha: BilinearMap,
    J: ComplexStructure,
    domain_inner: QuadSpace | None = None,
    w: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
) -> KaehlerPair:
    domain = domain_inner or alpha.domain
    n2 = alpha.domain_dim
    if J.dim != n2 or domain.dim != n2:
        raise DimensionMismatch(f"α acts on dimension {n2}, J on {J.dim}, inner product on {domain.dim}")
    if domain.signature[1] != 0:
        raise InvalidForm("domain inner product must be positive definite")
    scale = alpha.entry_scale()
    if alpha.symmetry_defect() > tol * scale:
        raise InvalidForm("α is not symmetric")
    if J.isometry_defect(domain.gram) > tol * max(1.0, float(np.abs(domain.gram).max())):
        raise InvalidForm("J is not an isometry of the domain inner product")

    T, Jm = alpha.tensor, J.matrix
    at_jj = np.einsum("ai,bj,abk->ijk", Jm, Jm, T)
    at_xj = _at_j_right(Jm, T)
    at_jx = _at_j_left(Jm, T)
    doubled = DoubledSpace.over(alpha.target)
    alpha = BilinearMap(T, alpha.target, domain)
    beta = BilinearMap(np.concatenate([T + at_jj, at_xj - at_jx], axis=2), doubled.whole, domain)
    gamma = BilinearMap(np.concatenate([T, at_xj], axis=2), doubled.whole, domain)

    if w is not None:
        w = np.asarray(w, dtype=float)
        if w.shape != (alpha.target.dim,):
            raise DimensionMismatch(f"w must have length {alpha.target.dim}, got shape {w.shape}")
        if abs(alpha.target.inner(w, w) + 1.0) > tol:
            raise ShapeIdViolation("w is not a time-like unit vector")
        defect = shape_identity_defect(alpha, w, domain)
        if defect > tol * scale:
            raise ShapeIdViolation(f"⟨α(X,Y), w⟩ = −(X,Y) fails by {defect:.3e}")
        w = w.copy()
        w.setflags(write=False)
    return KaehlerPair(alpha, J, domain, beta, gamma, doubled, w)


def symmetry_report(pair: KaehlerPair) -> float:
    """Largest residual of β(X,JY) = −β(JX,Y) and, for β(X,Y) = (ξ,η),
    β(X,JY) = (η,−ξ), β(Y,X) = (ξ,−η), β(JY,X) = (η,ξ) over basis pairs."""
    B, Jm, p = pair.beta.tensor, pair.J.matrix, pair.p
    xi, eta = B[..., :p], B[..., p:]
    b_x_jy = _at_j_right(Jm, B)
    b_jx_y = _at_j_left(Jm, B)
    b_jy_x = np.einsum("aj,aik->ijk", Jm, B)
    residuals = [
        b_x_jy + b_jx_y,
        b_x_jy - np.concatenate([eta, -xi], axis=2),
        B.transpose(1, 0, 2) - np.concatenate([xi, -eta], axis=2),
        b_jy_x - np.concatenate([eta, xi], axis=2),
    ]
    return float(max(np.abs(r).max(initial=0.0) for r in residuals))


def kernel_is_j_invariant(pair: KaehlerPair, tol: float = DEFAULT_TOL) -> bool:
    kernel = right_kernel(pair.beta, tol)
    return kernel.contains(pair.J.matrix @ kernel.basis, tol)


@dataclass(frozen=True, eq=False)
class SpanAnalysis:
    span: Subspace
    U0: Subspace
    s: int
    degenerate: bool
    v: np.ndarray | None
    radical_rank: int
    equality_defect: float


def span_analysis(pair: KaehlerPair, tol: float = DEFAULT_TOL) -> SpanAnalysis:
    """𝒮(β) = U₀ ⊕ U₀ with U₀ = π₁(𝒮(β)); in the degenerate case the radical
    is span{(v,0),(0,v)} for a light-like v ∈ U₀."""
    p = pair.p
    base, whole = pair.doubled.base, pair.doubled.whole
    S = image_span(pair.beta, tol)
    U0 = Subspace.span(base, S.basis[:p, :], tol)
    defect = S.span_defect(pair.doubled.doubled_subspace(U0))

    rad = radical(whole, S, tol)
    v = None
    if rad.rank > 0:
        v = find_lightlike(base, Subspace.span(base, rad.basis[:p, :], tol), tol)
        logger.debug("degenerate span: s=%d, radical rank %d", U0.rank, rad.rank)
    return SpanAnalysis(S, U0, U0.rank, rad.rank > 0, v, rad.rank, defect)


@dataclass(frozen=True, eq=False)
class DegenerateSplit:
    v: np.ndarray
    w: np.ndarray
    u: np.ndarray
    plane_L: Subspace
    perp: np.ndarray
    beta1: BilinearMap
    s: int
    kernel1: Subspace
    residual: float
    bound: int

    @property
    def bound_holds(self) -> bool:
        return self.kernel1.rank >= self.bound


def degenerate_split(
    pair: KaehlerPair, analysis: SpanAnalysis | None = None, tol: float = DEFAULT_TOL
) -> DegenerateSplit:
    """β = β₁ + 2((X,Y)v, (X,JY)v) with β₁ the L⊥-part of β, L = span{v,w}."""
    if pair.w is None:
        raise HypothesisViolated("degenerate split needs the distinguished time-like vector w")
    analysis = analysis or span_analysis(pair, tol)
    if not analysis.degenerate:
        raise NotDegenerate("𝒮(β) is nondegenerate")

    base = pair.doubled.base
    w = np.asarray(pair.w)
    v = np.asarray(analysis.v)
    vw = base.inner(v, w)
    if abs(vw) <= tol:
        raise PlaneNotLorentzian("light-like direction is orthogonal to w")
    v = -v / vw
    plane = Subspace.from_vectors(base, [v, w], tol)
    if plane.rank != 2 or plane.signature(tol) != (1, 1):
        raise PlaneNotLorentzian(f"span{{v, w}} has signature {plane.signature(tol)}")

    frame = np.column_stack([v, w])
    G = base.gram
    to_plane = frame @ np.linalg.solve(frame.T @ G @ frame, frame.T @ G)
    perp = np.eye(base.dim) - to_plane
    beta1 = map_values(pair.beta, linalg.block_diag(perp, perp))

    metric = pair.domain_inner.gram
    metric_j = metric @ pair.J.matrix
    correction = 2.0 * np.concatenate(
        [metric[..., None] * v, metric_j[..., None] * v], axis=2
    )
    residual = float(np.abs(pair.beta.tensor - beta1.tensor - correction).max())
    kernel1 = right_kernel(beta1, tol)
    bound = 2 * pair.n - 2 * analysis.s + 2
    logger.debug("degenerate split: s=%d, dim N(β₁)=%d, bound %d", analysis.s, kernel1.rank, bound)
    return DegenerateSplit(v, w.copy(), v - w, plane, perp, beta1, analysis.s, kernel1, residual, bound)


def compatibility_defect(pair: KaehlerPair) -> float:
    """max |⟨⟨β(X,Y),γ(Z,T)⟩⟩ − ⟨⟨β(X,T),γ(Z,Y)⟩⟩| over basis 4-tuples."""
    products = np.einsum(
        "ija,ab,klb->ijkl", pair.beta.tensor, pair.doubled.whole.gram, pair.gamma.tensor
    )
    return float(np.abs(products - products.transpose(0, 3, 2, 1)).max())


def _compatibility_tolerance(pair: KaehlerPair, tol: float) -> float:
    return tol * pair.beta.entry_scale() * pair.gamma.entry_scale()


def _domain_frame(domain: QuadSpace) -> np.ndarray:
    """Columns orthonormal for a positive-definite domain inner product."""
    lower = linalg.cholesky(domain.gram, lower=True)
    return linalg.solve_triangular(lower, np.eye(domain.dim), lower=True).T


# Gauss-equation curvature of a Lorentzian-valued second fundamental form:
# ⟨R(X,Y)Z,T⟩ = ⟨α(X,T),α(Y,Z)⟩ − ⟨α(X,Z),α(Y,T)⟩


def curvature_tensor(alpha: BilinearMap, X, Y, Z, T) -> float:
    G = alpha.target.gram
    return float(
        evaluate(alpha, X, T) @ G @ evaluate(alpha, Y, Z)
        - evaluate(alpha, X, Z) @ G @ evaluate(alpha, Y, T)
    )


def sectional_curvature(alpha: BilinearMap, X, Y) -> float:
    g = alpha.domain.gram
    X, Y = np.asarray(X, dtype=float), np.asarray(Y, dtype=float)
    area = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
    if area <= DEFAULT_TOL:
        raise InvalidForm("vectors do not span a plane")
    return curvature_tensor(alpha, X, Y, Y, X) / area


def holomorphic_curvature(alpha: BilinearMap, J: ComplexStructure, S) -> float:
    return sectional_curvature(alpha, S, J.apply(S))


def holomorphic_functional(alpha: BilinearMap, J: ComplexStructure, S) -> float:
    """𝒦(S) = ⟨α(S,S),α(JS,JS)⟩ − ‖α(S,JS)‖²."""
    G = alpha.target.gram
    JS = J.apply(S)
    mixed = evaluate(alpha, S, JS)
    return float(evaluate(alpha, S, S) @ G @ evaluate(alpha, JS, JS) - mixed @ G @ mixed)


def ricci_functional(alpha: BilinearMap, S) -> float:
    """ℛ(S) = Σ_i ⟨α(E_i,E_i),α(S,S)⟩ − ‖α(E_i,S)‖² over an orthonormal basis."""
    G = alpha.target.gram
    frame = _domain_frame(alpha.domain)
    S = np.asarray(S, dtype=float)
    diagonal = np.einsum("ia,jb,ijk->abk", frame, frame, alpha.tensor)
    trace = np.einsum("aak->k", diagonal)
    column = np.einsum("ia,j,ijk->ak", frame, S, alpha.tensor)
    return float(trace @ G @ evaluate(alpha, S, S) - np.einsum("ak,kl,al->", column, G, column))


def ricci_curvature(alpha: BilinearMap, S) -> float:
    S = np.asarray(S, dtype=float)
    return ricci_functional(alpha, S) / float(S @ alpha.domain.gram @ S)


@dataclass(frozen=True, eq=False)
class UmbilicalAnalysis:
    v: np.ndarray
    eta: np.ndarray
    P: Subspace
    K_values: np.ndarray
    Ric_values: np.ndarray
    umbilic_residual: float
    alphapar_residual: float

    @property
    def m(self) -> int:
        return self.P.rank // 2


def _unit_samples(basis: np.ndarray, domain: QuadSpace, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((count, basis.shape[1])) @ basis.T
    norms = np.sqrt(np.einsum("si,ij,sj->s", vectors, domain.gram, vectors))
    return vectors / norms[:, None]


def umbilical_analysis(
    pair: KaehlerPair,
    split: DegenerateSplit,
    samples: int = CURVATURE_SAMPLES,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> UmbilicalAnalysis:
    """⟨α(X,Y),v⟩ = 0, α = α_{L⊥} + (X,Y)v, and 𝒦, ℛ ≤ 0 on P = 𝒩(β₁)."""
    if split.s > pair.n - 1:
        raise HypothesisViolated(f"s = {split.s} exceeds n − 1 = {pair.n - 1}")
    defect = compatibility_defect(pair)
    if defect > _compatibility_tolerance(pair, tol):
        raise HypothesisViolated(f"β and γ are not compatible: defect {defect:.3e}")

    alpha = pair.alpha
    G = alpha.target.gram
    umbilic = float(np.abs(np.einsum("ijk,k->ij", alpha.tensor, G @ split.v)).max())
    along_perp = np.einsum("ijk,lk->ijl", alpha.tensor, split.perp)
    parallel = pair.domain_inner.gram[..., None] * split.v
    alphapar = float(np.abs(alpha.tensor - along_perp - parallel).max())

    P = split.kernel1
    if P.rank:
        vectors = _unit_samples(P.basis, pair.domain_inner, samples, seed)
        K = np.array([holomorphic_functional(alpha, pair.J, S) for S in vectors])
        Ric = np.array([ricci_functional(alpha, S) for S in vectors])
    else:
        K = Ric = np.zeros(0)
    return UmbilicalAnalysis(split.v, split.u, P, K, Ric, umbilic, alphapar)


@dataclass(frozen=True, eq=False)
class LightlikeWitness:
    v: np.ndarray
    inclusion_defect: float
    orthogonality_defect: float
    null_pairs_checked: int
    null_pair_defect: float


def kernel_lightlike(
    pair: KaehlerPair,
    X: np.ndarray | None = None,
    seed: int = 0,
    samples: int = HYPOTHESIS_SAMPLES,
    tol: float = DEFAULT_TOL,
) -> LightlikeWitness:
    """Light-like v with span{v}⊕span{v} ⊂ 𝒮(β|V×N(X)) ⊂ B_X(V) ∩ B_X(V)⊥.

    Null pairs (v',w') of B_X(V), drawn from the generators and from seeded
    random combinations, are checked to lie in span{v}.
    """
    beta = pair.beta
    report = flatness_report(beta, tol)
    if not report.is_flat:
        raise NotFlat(f"β is not flat: defect {report.max_defect:.3e}")
    if X is None:
        X, _ = find_regular_element(beta, seed, tol=tol)
    p = pair.p
    base, whole = pair.doubled.base, pair.doubled.whole

    B = left_map(beta, X)
    kernel = B.kernel(tol)
    if kernel.rank == 0:
        raise HypothesisViolated("N(X) = 0, so β vanishes on V × N(X)")
    generators = np.einsum("ijk,jb->ibk", beta.tensor, kernel.basis).reshape(-1, 2 * p).T
    S_N = Subspace.span(whole, generators, tol)
    if S_N.rank == 0:
        raise HypothesisViolated("β vanishes on V × N(X); N(X) lies in 𝒩(β)")

    image = B.image(tol)
    inclusion = image.containment_defect(S_N)
    orthogonality = float(np.abs(S_N.basis.T @ whole.gram @ image.basis).max())
    if max(inclusion, orthogonality) > np.sqrt(tol):
        raise HypothesisViolated("𝒮(β|V×N(X)) is not inside B_X(V) ∩ B_X(V)⊥; X is not regular")

    # (v, 0) directions of S_N
    coeffs = null_space(S_N.basis[p:, :], tol)
    line = Subspace.span(base, S_N.basis[:p, :] @ coeffs, tol)
    if line.rank == 0:
        raise HypothesisViolated("𝒮(β|V×N(X)) has no (v, 0) direction")
    v = find_lightlike(base, line, tol)
    zero = np.zeros(p)
    if not (S_N.contains(np.concatenate([v, zero]), tol) and S_N.contains(np.concatenate([zero, v]), tol)):
        raise HypothesisViolated("span{v} ⊕ span{v} is not inside 𝒮(β|V×N(X))")

    rng = np.random.default_rng(seed)
    candidates = np.hstack(
        [S_N.basis, image.basis, image.basis @ rng.standard_normal((image.rank, samples))]
    )
    line_v = Subspace.from_vectors(base, [v])
    checked, worst = 0, 0.0
    for c in candidates.T:
        c = c / np.linalg.norm(c)
        first, second = c[:p], c[p:]
        if abs(base.inner(first, first)) > tol or abs(base.inner(second, second)) > tol:
            continue
        checked += 1
        for part in (first, second):
            if np.linalg.norm(part) > tol:
                worst = max(worst, line_v.containment_defect(part))
    return LightlikeWitness(v, inclusion, orthogonality, checked, worst)


@dataclass(frozen=True)
class KernelBound:
    kernel_dim: int
    bound: int
    regular_rank: int
    isomorphism: bool | None

    @property
    def holds(self) -> bool:
        return self.kernel_dim >= self.bound


def kernel_bound_check(pair: KaehlerPair, seed: int = 0, tol: float = DEFAULT_TOL) -> KernelBound:
    """dim 𝒩(β) ≥ 2n − 2p for flat surjective β; when 𝒩(β) = 0 also whether
    B_X is an isomorphism for regular X."""
    beta = pair.beta
    n, p = pair.n, pair.p
    span = image_span(beta, tol)
    if span.rank != 2 * p:
        raise HypothesisViolated(f"β is not surjective: rank {span.rank} < {2 * p}")
    if p > n:
        raise HypothesisViolated(f"p = {p} exceeds n = {n}")
    report = flatness_report(beta, tol)
    if not report.is_flat:
        raise NotFlat(f"β is not flat: defect {report.max_defect:.3e}")
    kernel = right_kernel(beta, tol)
    _, rank = find_regular_element(beta, seed, tol=tol)
    isomorphism = (rank == 2 * n == 2 * p) if kernel.rank == 0 else None
    logger.debug("kernel bound: dim N(β)=%d, regular rank %d, dim N(X)=%d", kernel.rank, rank, 2 * n - rank)
    return KernelBound(kernel.rank, 2 * n - 2 * p, rank, isomorphism)


def nondegenerate_kernel_bound(pair: KaehlerPair, codimension: int) -> tuple[int, int]:
    """(2n − 2·codimension − 2, dim 𝒩(β)). A nondegenerate 𝒮(β) would force the
    kernel dimension up to the bound; a smaller kernel means 𝒮(β) is degenerate."""
    return 2 * pair.n - 2 * codimension - 2, right_kernel(pair.beta).rank


def restrict_pair(pair: KaehlerPair, basis: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[KaehlerPair, np.ndarray]:
    """Restriction to a J-invariant subspace, in coordinates of a basis that is
    orthonormal for the domain inner product. Returns the pair and that basis."""
    G = pair.domain_inner.gram
    B0 = np.asarray(basis, dtype=float)
    lower = linalg.cholesky(B0.T @ G @ B0, lower=True)
    E = linalg.solve_triangular(lower, B0.T, lower=True).T

    Jm = pair.J.matrix
    J_sub = E.T @ G @ Jm @ E
    # loose threshold: kernel bases carry round-off from the rank decisions
    if np.abs(Jm @ E - E @ J_sub).max() > np.sqrt(tol):
        raise RecursionFailed("subspace is not J-invariant")
    if np.abs(J_sub @ J_sub + np.eye(J_sub.shape[0])).max() > tol / 10:
        J_sub, _ = linalg.polar(0.5 * (J_sub - J_sub.T))
    sub = build_pair(restrict(pair.alpha, E), ComplexStructure(J_sub), None, pair.w, tol)
    return sub, E


def zero_product_pair(pair: KaehlerPair, seed: int = 0, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero X, Y with β(X,Y) = 0, from an eigenpair of B_{Z₁}⁻¹B_{Z₂}."""
    n = pair.n
    if n < 2:
        raise HypothesisViolated("a zero product pair needs n ≥ 2")
    beta, Jm = pair.beta, pair.J.matrix
    Z1, rank = find_regular_element(beta, seed, tol=tol)
    if rank < 2 * n:
        raise HypothesisViolated(f"B_X has rank {rank} < {2 * n} for regular X")

    rng = np.random.default_rng([seed, 1])
    for _ in range(DEFAULT_SAMPLES):
        Z2 = rng.standard_normal(2 * n)
        Z2 /= np.linalg.norm(Z2)
        if numerical_rank(np.column_stack([Z1, Jm @ Z1, Z2]), tol) < 3:
            continue
        if left_map(beta, Z2).rank(tol) == 2 * n:
            break
    else:
        raise SearchFailed("no second element with invertible left map")

    B1 = left_map(beta, Z1).matrix
    B2 = left_map(beta, Z2).matrix
    A, *_ = np.linalg.lstsq(B1, B2, rcond=None)
    eigenvalues, eigenvectors = np.linalg.eig(A)
    limit = tol * beta.entry_scale()
    g = pair.domain_inner.gram

    for idx in np.argsort(np.abs(eigenvalues.imag), kind="stable"):
        lam, vec = eigenvalues[idx], eigenvectors[:, idx]
        S = Z2 - lam * Z1
        S1, S2, T1, T2 = S.real, S.imag, vec.real, vec.imag
        found = []
        for X, Y in ((S1 - Jm @ S2, T1 + Jm @ T2), (S1 + Jm @ S2, T1 - Jm @ T2)):
            nx, ny = np.sqrt(X @ g @ X), np.sqrt(Y @ g @ Y)
            if nx < tol or ny < tol:
                continue
            X, Y = X / nx, Y / ny
            residual = float(np.linalg.norm(evaluate(beta, X, Y)))
            if residual <= limit:
                found.append((residual, X, Y))
        if found:
            residual, X, Y = min(found, key=lambda item: item[0])
            logger.debug("zero product pair from eigenvalue %s, residual %.2e", lam, residual)
            return X, Y
    raise SearchFailed("no eigenpair produced a zero product pair at tolerance")


def corank2_element(pair: KaehlerPair, seed: int = 0, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Z₀ with dim N(Z₀) = 2n − 2, by descent through N(X) for zero product X."""
    n = pair.n
    if n == 1:
        return _domain_frame(pair.domain_inner)[:, 0]
    beta = pair.beta
    X, _ = zero_product_pair(pair, seed, tol)
    B = left_map(beta, X)
    kernel_dim = 2 * n - B.rank(tol)
    logger.debug("corank descent: n=%d, dim N(X)=%d", n, kernel_dim)
    if kernel_dim == 2 * n - 2:
        return X
    if kernel_dim < 2 or kernel_dim % 2:
        raise RecursionFailed(f"dim N(X) = {kernel_dim} is not an even number in [2, 2n − 2]")

    sub, E = restrict_pair(pair, B.kernel(tol).basis, tol)
    if image_span(sub.beta, tol).is_degenerate(tol):
        raise RecursionFailed("restricted span is degenerate")
    Z = E @ corank2_element(sub, seed + 1, tol)
    Z /= np.sqrt(Z @ pair.domain_inner.gram @ Z)
    if 2 * n - left_map(beta, Z).rank(tol) != 2 * n - 2:
        raise RecursionFailed("lifted element does not have corank 2")
    return Z


@dataclass(frozen=True, eq=False)
class CoRankTwoSplit:
    bzv: Subspace
    rest: Subspace
    xi: np.ndarray
    cross_defect: float
    nondegenerate: bool
    sum_defect: float


def kercod2_split(pair: KaehlerPair, Z: np.ndarray, tol: float = DEFAULT_TOL) -> CoRankTwoSplit:
    """𝒮(β) = B_Z(V) ⊕ 𝒮(β|N(Z)×N(Z)) for dim N(Z) = 2n − 2."""
    beta, n, p = pair.beta, pair.n, pair.p
    B = left_map(beta, Z)
    kernel = B.kernel(tol)
    if kernel.rank != 2 * n - 2:
        raise BadCorank(f"dim N(Z) = {kernel.rank}, expected {2 * n - 2}")

    whole = pair.doubled.whole
    xi = evaluate(beta, Z, Z)[:p]
    bzv = B.image(tol)
    if kernel.rank:
        rest = image_span(restrict(beta, kernel.basis), tol)
    else:
        rest = Subspace.zero(whole)
    cross = float(np.abs(bzv.basis.T @ whole.gram @ rest.basis).max(initial=0.0))
    xi_norm = abs(pair.doubled.base.inner(xi, xi))
    nondegenerate = not bzv.is_degenerate(tol) and xi_norm > tol * beta.entry_scale() ** 2
    sum_defect = image_span(beta, tol).span_defect(bzv.direct_sum(rest, tol))
    return CoRankTwoSplit(bzv, rest, xi, cross, nondegenerate, sum_defect)


def left_image_structure(pair: KaehlerPair, X: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Defects of B_X(V) = U₁ ⊕ U₁ (U₁ = π₁(B_X(V))) and of
    B_X(V) = {β(Z,X) : Z ∈ V}."""
    p = pair.p
    image = left_map(pair.beta, X).image(tol)
    U1 = Subspace.span(pair.doubled.base, image.basis[:p, :], tol)
    right_values = np.einsum("ijk,j->ki", pair.beta.tensor, np.asarray(X, dtype=float))
    right_image = Subspace.span(pair.doubled.whole, right_values, tol)
    return image.span_defect(pair.doubled.doubled_subspace(U1)), image.span_defect(right_image)


def sampled_degenerate_subspace_check(
    pair: KaehlerPair, seed: int = 0, samples: int = HYPOTHESIS_SAMPLES, tol: float = DEFAULT_TOL
) -> int:
    """Number of sampled J-invariant V₁ with 𝒮(β|V₁×V₁) degenerate and of
    dimension ≤ dim V₁ − 2. Zero is necessary, not sufficient, for the
    hypothesis that no such V₁ exists."""
    n, Jm = pair.n, pair.J.matrix
    rng = np.random.default_rng(seed)
    violations = 0
    for k in range(1, n):
        for _ in range(samples):
            Y = rng.standard_normal((2 * n, k))
            basis = column_span(np.hstack([Y, Jm @ Y]), tol)
            if basis.shape[1] != 2 * k:
                continue
            span = image_span(restrict(pair.beta, basis), tol)
            if span.is_degenerate(tol) and span.rank <= 2 * k - 2:
                violations += 1
    return violations


@dataclass(frozen=True, eq=False)
class DiagonalizingBasis:
    pairs: np.ndarray
    partners: np.ndarray
    xis: np.ndarray
    norms: np.ndarray
    raw_xis: np.ndarray

    @property
    def n(self) -> int:
        return int(self.pairs.shape[0])


@dataclass(frozen=True, eq=False)
class DiagonalResiduals:
    off_diagonal: float
    gram: np.ndarray
    gram_defect: float


def diagonal_residuals(pair: KaehlerPair, basis: DiagonalizingBasis) -> DiagonalResiduals:
    """‖β(Y_i,Y_j)‖ over i ≠ j and the four generator choices, and the Gram
    of the normalized β(X_j,X_j), β(X_j,JX_j)."""
    beta, whole = pair.beta, pair.doubled.whole
    blocks = [(basis.pairs[i], basis.partners[i]) for i in range(basis.n)]
    off = 0.0
    for i, Yi in enumerate(blocks):
        for j, Yj in enumerate(blocks):
            if i == j:
                continue
            for a in Yi:
                for b in Yj:
                    off = max(off, float(np.linalg.norm(evaluate(beta, a, b))))

    vectors = []
    for X, JX in blocks:
        for value in (evaluate(beta, X, X), evaluate(beta, X, JX)):
            vectors.append(value / np.sqrt(abs(whole.inner(value, value))))
    V = np.column_stack(vectors)
    gram = V.T @ whole.gram @ V
    expected = np.diag(np.sign(np.diag(gram)))
    return DiagonalResiduals(off, gram, float(np.abs(gram - expected).max()))


def _diagonal_chain(pair: KaehlerPair, seed: int, tol: float) -> tuple[list[np.ndarray], list[np.ndarray]]:
    p = pair.p
    if pair.n == 1:
        X = _domain_frame(pair.domain_inner)[:, 0]
        return [X], [evaluate(pair.beta, X, X)[:p]]
    Z = corank2_element(pair, seed, tol)
    Z = Z / np.sqrt(Z @ pair.domain_inner.gram @ Z)
    split = kercod2_split(pair, Z, tol)
    if not split.nondegenerate:
        raise RecursionFailed("B_Z(V) is degenerate")
    sub, E = restrict_pair(pair, left_map(pair.beta, Z).kernel(tol).basis, tol)
    rest_vectors, rest_xis = _diagonal_chain(sub, seed + 1, tol)
    return [Z] + [E @ x for x in rest_vectors], [split.xi] + rest_xis


def diagonalize(
    pair: KaehlerPair,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    hypothesis_samples: int = HYPOTHESIS_SAMPLES,
) -> DiagonalizingBasis:
    """Orthogonal basis {X_i, JX_i} with β(Y_i,Y_j) = 0 for i ≠ j and
    {β(X_j,X_j), β(X_j,JX_j)} an orthonormal basis of 𝒮(β) after scaling.
    Pairs whose ξ is time-like come first."""
    beta, n = pair.beta, pair.n
    report = flatness_report(beta, tol)
    if not report.is_flat:
        raise NotFlat(f"β is not flat: defect {report.max_defect:.3e}")
    analysis = span_analysis(pair, tol)
    if analysis.degenerate:
        raise DegenerateSpan("𝒮(β) is degenerate")
    defect = compatibility_defect(pair)
    if defect > _compatibility_tolerance(pair, tol):
        raise HypothesisViolated(f"β and γ are not compatible: defect {defect:.3e}")
    kernel = right_kernel(beta, tol)
    if kernel.rank:
        raise HypothesisViolated(f"𝒩(β) has dimension {kernel.rank}")
    if analysis.s != n:
        raise HypothesisViolated(f"s = {analysis.s} differs from n = {n}")
    if pair.p >= 4:
        violations = sampled_degenerate_subspace_check(pair, seed, hypothesis_samples, tol)
        if violations:
            raise HypothesisViolated(f"{violations} sampled J-invariant subspaces have degenerate span")

    vectors, xis = _diagonal_chain(pair, seed, tol)
    base = pair.doubled.base
    norms = np.array([base.inner(xi, xi) for xi in xis])
    order = sorted(range(n), key=lambda i: (norms[i] > 0, i))
    pairs = np.array([vectors[i] for i in order])
    raw = np.array([xis[i] for i in order])
    signs = np.sign(norms[order])
    scaled = raw / np.sqrt(np.abs(norms[order]))[:, None]
    partners = pairs @ pair.J.matrix.T
    logger.debug("diagonalized n=%d with signs %s", n, signs.tolist())
    return DiagonalizingBasis(pairs, partners, scaled, signs, raw)
