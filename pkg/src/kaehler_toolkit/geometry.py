"""Model immersions into hyperbolic space, realised in the hyperboloid model.

Two families are built:

* products of umbilical surfaces, a hyperbolic plane in L³ followed by round
  spheres in R³, whose radii satisfy −r₁² + Σ r_j² = −1 so the product lies in
  H^{3n−1} ⊂ L^{3n};
* a sphere times a flat factor, S² × R^{2n−2} ⊂ R^{2n+1}, composed with the
  horosphere chart ψ(x) = (1 + |x|²/2, x, |x|²/2) into H^{2n+2} ⊂ L^{2n+3}.

Tangent vectors are given in frame coordinates: the orthonormal frame is
ordered (e₁, Je₁, e₂, Je₂, …) with one J-pair per surface factor, then the
flat directions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .bilinear import BilinearMap
from .config import CURVATURE_SAMPLES, DEFAULT_STEP, DEFAULT_TOL
from .errors import (
    ChartDomainError,
    CurvatureConstraintViolated,
    HypothesisViolated,
    InvalidForm,
    NotFlatNormalBundle,
    NoUmbilicalNormal,
    ReferencePointCoincides,
)
from .kaehler_forms import (
    ComplexStructure,
    KaehlerPair,
    build_pair,
    curvature_tensor,
    degenerate_split,
    holomorphic_curvature,
    ricci_curvature,
    sectional_curvature,
    span_analysis,
    umbilical_analysis,
)
from .pseudo_linear import QuadSpace, Subspace, null_space, orthonormal_frame

logger = logging.getLogger(__name__)

SPHERE = "sphere"
HYPERBOLIC = "hyperbolic"

_SPHERE_MARGIN = 0.1
_HYPERBOLIC_MIN = 0.1
_HYPERBOLIC_MAX = 3.0


@dataclass(frozen=True)
class SurfaceImmersion:
    """Umbilical surface of constant curvature c: a round sphere in R³
    (c > 0) or the upper hyperboloid sheet in L³ = diag(−1, 1, 1) (c < 0)."""

    curvature: float
    kind: str
    orientation: int = 1

    def __post_init__(self) -> None:
        if self.kind not in (SPHERE, HYPERBOLIC):
            raise InvalidForm(f"unknown surface kind {self.kind!r}")
        if self.curvature == 0 or (self.curvature > 0) != (self.kind == SPHERE):
            raise InvalidForm(f"curvature {self.curvature} does not fit a {self.kind}")
        if self.orientation not in (1, -1):
            raise InvalidForm("orientation must be +1 or -1")

    @classmethod
    def sphere(cls, radius: float) -> SurfaceImmersion:
        return cls(1.0 / radius**2, SPHERE)

    @classmethod
    def hyperbolic(cls, radius: float) -> SurfaceImmersion:
        return cls(-1.0 / radius**2, HYPERBOLIC)

    @property
    def radius(self) -> float:
        return float(1.0 / np.sqrt(abs(self.curvature)))

    @property
    def space(self) -> QuadSpace:
        if self.kind == SPHERE:
            return QuadSpace.euclidean(3)
        return QuadSpace.from_diagonal([-1.0, 1.0, 1.0])

    def check_domain(self, u: float, v: float) -> None:
        if self.kind == SPHERE:
            if not (_SPHERE_MARGIN < u < np.pi - _SPHERE_MARGIN and 0.0 < v < 2 * np.pi):
                raise ChartDomainError(f"sphere angles ({u}, {v}) outside the chart domain")
        elif not (_HYPERBOLIC_MIN <= abs(u) < _HYPERBOLIC_MAX):
            raise ChartDomainError(f"hyperboloid parameter u={u} outside 0.1 <= |u| < 3")

    def point(self, u: float, v: float) -> np.ndarray:
        r = self.radius
        if self.kind == SPHERE:
            return r * np.array([np.sin(u) * np.cos(v), np.sin(u) * np.sin(v), np.cos(u)])
        return r * np.array([np.cosh(u), np.sinh(u) * np.cos(v), np.sinh(u) * np.sin(v)])

    def derivatives(self, u: float, v: float) -> tuple[np.ndarray, np.ndarray]:
        r = self.radius
        if self.kind == SPHERE:
            du = r * np.array([np.cos(u) * np.cos(v), np.cos(u) * np.sin(v), -np.sin(u)])
            dv = r * np.array([-np.sin(u) * np.sin(v), np.sin(u) * np.cos(v), 0.0])
        else:
            du = r * np.array([np.sinh(u), np.cosh(u) * np.cos(v), np.cosh(u) * np.sin(v)])
            dv = r * np.array([0.0, -np.sinh(u) * np.sin(v), np.sinh(u) * np.cos(v)])
        return du, dv

    def metric(self, u: float) -> np.ndarray:
        r = self.radius
        stretch = np.sin(u) if self.kind == SPHERE else np.sinh(u)
        return np.diag([r**2, (r * stretch) ** 2])

    def normal(self, x: np.ndarray) -> np.ndarray:
        """Umbilical normal η = −x/⟨x,x⟩, so that ⟨α(X,Y), x⟩ = −⟨X,Y⟩."""
        return -x / self.space.inner(x, x)

    def random_point(self, rng: np.random.Generator) -> tuple[float, float]:
        if self.kind == SPHERE:
            return float(rng.uniform(0.2, np.pi - 0.2)), float(rng.uniform(0.1, 2 * np.pi - 0.1))
        return float(rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.5)), float(rng.uniform(0.0, 2 * np.pi))

    def geodesic(self, x: np.ndarray, V: np.ndarray, t: float) -> np.ndarray:
        speed = np.sqrt(max(self.space.inner(V, V), 0.0))
        if speed == 0.0:
            return x.copy()
        r = self.radius
        angle = speed * t / r
        if self.kind == SPHERE:
            return x * np.cos(angle) + (r / speed) * V * np.sin(angle)
        return x * np.cosh(angle) + (r / speed) * V * np.sinh(angle)


@dataclass(frozen=True, eq=False)
class ProductImmersion:
    factors: tuple[SurfaceImmersion, ...]
    flat_dim: int = 0
    horospherical: bool = False

    @property
    def n(self) -> int:
        return len(self.factors) + self.flat_dim // 2

    @property
    def param_dim(self) -> int:
        return 2 * len(self.factors) + self.flat_dim

    @property
    def chart_dim(self) -> int:
        return 3 * len(self.factors) + self.flat_dim

    @property
    def chart_space(self) -> QuadSpace:
        blocks = [f.space.gram for f in self.factors]
        if self.flat_dim:
            blocks.append(np.eye(self.flat_dim))
        return QuadSpace(linalg.block_diag(*blocks))

    @property
    def ambient(self) -> QuadSpace:
        if self.horospherical:
            return QuadSpace.from_diagonal([-1.0] + [1.0] * self.chart_dim + [1.0])
        return self.chart_space

    @property
    def codimension(self) -> int:
        """Codimension of f in the hyperbolic space."""
        return self.ambient.dim - 1 - 2 * self.n


def make_example1(radii, tol: float = DEFAULT_TOL) -> ProductImmersion:
    """H²(−1/r₁²) × S²(1/r₂²) × ⋯ × S²(1/r_n²) ⊂ H^{3n−1}."""
    radii = [float(r) for r in radii]
    if len(radii) < 2:
        raise CurvatureConstraintViolated("a product needs at least two factors")
    if min(radii) <= 0:
        raise CurvatureConstraintViolated("radii must be positive")
    total = -radii[0] ** 2 + sum(r**2 for r in radii[1:])
    if abs(total + 1.0) > tol * max(1.0, max(r**2 for r in radii)):
        raise CurvatureConstraintViolated(f"−r₁² + Σ r_j² = {total!r}, expected −1")
    factors = (SurfaceImmersion.hyperbolic(radii[0]),) + tuple(SurfaceImmersion.sphere(r) for r in radii[1:])
    return ProductImmersion(factors)


def make_horosphere_composition(n: int, surface: SurfaceImmersion | None = None) -> ProductImmersion:
    """S² × R^{2n−2} ⊂ R^{2n+1} composed with the horosphere chart."""
    if n < 3:
        raise InvalidForm(f"horosphere composition needs n >= 3, got {n}")
    surface = surface or SurfaceImmersion.sphere(1.0)
    if surface.kind != SPHERE:
        raise InvalidForm("the horosphere composition uses a sphere factor")
    return ProductImmersion((surface,), flat_dim=2 * n - 2, horospherical=True)


def horosphere_chart(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    half = 0.5 * float(x @ x)
    return np.concatenate([[1.0 + half], x, [half]])


def horosphere_differential(x: np.ndarray) -> np.ndarray:
    """dψ_x as a (dim + 2) × dim matrix: V ↦ (⟨x,V⟩, V, ⟨x,V⟩)."""
    x = np.asarray(x, dtype=float)
    return np.vstack([x[None, :], np.eye(x.size), x[None, :]])


def _null_direction(dim: int) -> np.ndarray:
    """ζ = (1, 0, …, 0, 1): the second derivative of ψ is ⟨V,W⟩ζ."""
    zeta = np.zeros(dim)
    zeta[0] = zeta[-1] = 1.0
    return zeta


@dataclass(frozen=True, eq=False)
class PointFrame:
    params: np.ndarray
    chart_point: np.ndarray
    position: np.ndarray
    chart_tangent: np.ndarray
    tangent_frame: np.ndarray
    normal_frame_f: np.ndarray
    normal_frame_g: np.ndarray
    chart_normals: tuple[np.ndarray, ...]
    J: ComplexStructure


@dataclass(frozen=True, eq=False)
class SecondFundamentalData:
    alpha_f: BilinearMap
    alpha_g: BilinearMap
    etas: tuple[np.ndarray, ...]
    ambient_tensor: np.ndarray


def random_params(imm: ProductImmersion, rng: np.random.Generator) -> np.ndarray:
    values = []
    for factor in imm.factors:
        values.extend(factor.random_point(rng))
    values.extend(rng.uniform(-1.0, 1.0, imm.flat_dim))
    return np.array(values)


def _split_params(imm: ProductImmersion, params) -> tuple[list[tuple[float, float]], np.ndarray]:
    params = np.asarray(params, dtype=float)
    if params.shape != (imm.param_dim,):
        raise ChartDomainError(f"expected {imm.param_dim} parameters, got shape {params.shape}")
    k = len(imm.factors)
    pairs = [(float(params[2 * i]), float(params[2 * i + 1])) for i in range(k)]
    for factor, (u, v) in zip(imm.factors, pairs):
        factor.check_domain(u, v)
    return pairs, params[2 * k :]


def chart_point(imm: ProductImmersion, params) -> np.ndarray:
    pairs, flat = _split_params(imm, params)
    return np.concatenate([f.point(u, v) for f, (u, v) in zip(imm.factors, pairs)] + [flat])


def coordinate_derivatives(imm: ProductImmersion, params) -> np.ndarray:
    """∂g/∂params in chart coordinates, shape (chart_dim, param_dim)."""
    pairs, _ = _split_params(imm, params)
    D = np.zeros((imm.chart_dim, imm.param_dim))
    for i, (factor, (u, v)) in enumerate(zip(imm.factors, pairs)):
        du, dv = factor.derivatives(u, v)
        D[3 * i : 3 * i + 3, 2 * i] = du
        D[3 * i : 3 * i + 3, 2 * i + 1] = dv
    k = len(imm.factors)
    D[3 * k :, 2 * k :] = np.eye(imm.flat_dim)
    return D


def analytic_metric(imm: ProductImmersion, params) -> np.ndarray:
    pairs, _ = _split_params(imm, params)
    blocks = [f.metric(u) for f, (u, _) in zip(imm.factors, pairs)]
    if imm.flat_dim:
        blocks.append(np.eye(imm.flat_dim))
    return linalg.block_diag(*blocks)


def frame_at(imm: ProductImmersion, params) -> PointFrame:
    pairs, _ = _split_params(imm, params)
    x = chart_point(imm, params)
    chart = imm.chart_space
    k = len(imm.factors)

    tangent = np.zeros((imm.chart_dim, 2 * imm.n))
    normals = []
    for i, (factor, (u, v)) in enumerate(zip(imm.factors, pairs)):
        rows = slice(3 * i, 3 * i + 3)
        space = factor.space
        du, dv = factor.derivatives(u, v)
        e_u = du / np.sqrt(space.inner(du, du))
        e_v = dv - space.inner(dv, e_u) * e_u
        e_v /= np.sqrt(space.inner(e_v, e_v))
        tangent[rows, 2 * i] = e_u
        tangent[rows, 2 * i + 1] = factor.orientation * e_v
        eta = np.zeros(imm.chart_dim)
        eta[rows] = factor.normal(x[rows])
        normals.append(eta)
    tangent[3 * k :, 2 * k :] = np.eye(imm.flat_dim)

    if imm.horospherical:
        dpsi = horosphere_differential(x)
        position = horosphere_chart(x)
        frame = dpsi @ tangent
        sphere_normal = np.zeros(imm.chart_dim)
        sphere_normal[:3] = x[:3] / imm.factors[0].radius
        horo_normal = _null_direction(imm.ambient.dim) - position
        normal_f = np.column_stack([dpsi @ sphere_normal, horo_normal])
    else:
        position = x
        frame = tangent
        units = []
        for i, factor in enumerate(imm.factors):
            nu = np.zeros(imm.chart_dim)
            nu[3 * i : 3 * i + 3] = x[3 * i : 3 * i + 3] / factor.radius
            units.append(nu)
        units = np.column_stack(units)
        coeffs = null_space((position @ chart.gram @ units)[None, :])
        normal_f = orthonormal_frame(chart, Subspace.span(chart, units @ coeffs))

    return PointFrame(
        params=np.asarray(params, dtype=float).copy(),
        chart_point=x,
        position=position,
        chart_tangent=tangent,
        tangent_frame=frame,
        normal_frame_f=normal_f,
        normal_frame_g=np.column_stack([normal_f, position]),
        chart_normals=tuple(normals),
        J=ComplexStructure.standard(imm.n),
    )


def factor_planes(imm: ProductImmersion) -> list[np.ndarray]:
    """Frame indices of each surface factor's tangent plane."""
    return [np.array([2 * i, 2 * i + 1]) for i in range(len(imm.factors))]


def flat_indices(imm: ProductImmersion) -> np.ndarray:
    k = len(imm.factors)
    return np.arange(2 * k, 2 * k + imm.flat_dim)


def second_fundamental_form(imm: ProductImmersion, frame: PointFrame) -> SecondFundamentalData:
    """α^g in the flat ambient, then in coordinates c_k = ε_k⟨α, n_k⟩ of the
    normal frame (N_f, position); α^f drops the position slot."""
    n2 = 2 * imm.n
    chart_tensor = np.zeros((n2, n2, imm.chart_dim))
    for i, eta in enumerate(frame.chart_normals):
        chart_tensor[2 * i, 2 * i] = eta
        chart_tensor[2 * i + 1, 2 * i + 1] = eta

    if imm.horospherical:
        dpsi = horosphere_differential(frame.chart_point)
        ambient_tensor = np.einsum("abm,km->abk", chart_tensor, dpsi)
        ambient_tensor += np.eye(n2)[..., None] * _null_direction(imm.ambient.dim)
    else:
        ambient_tensor = chart_tensor

    G = imm.ambient.gram
    Ng = frame.normal_frame_g
    signs = np.sign(np.einsum("mk,mn,nk->k", Ng, G, Ng))
    coords = np.einsum("abm,mn,nk->abk", ambient_tensor, G, Ng) * signs
    alpha_g = BilinearMap(coords, QuadSpace.from_diagonal(signs))
    alpha_f = BilinearMap(coords[..., :-1], QuadSpace.from_diagonal(signs[:-1]))

    firsts = [2 * i for i in range(len(imm.factors))]
    if imm.flat_dim:
        firsts.append(2 * len(imm.factors))
    etas = tuple(ambient_tensor[a, a].copy() for a in firsts)
    return SecondFundamentalData(alpha_f, alpha_g, etas, ambient_tensor)


def kaehler_pair_at(imm: ProductImmersion, frame: PointFrame, tol: float = DEFAULT_TOL) -> KaehlerPair:
    sff = second_fundamental_form(imm, frame)
    w = np.zeros(sff.alpha_g.target.dim)
    w[-1] = 1.0
    return build_pair(sff.alpha_g, frame.J, QuadSpace.euclidean(2 * imm.n), w, tol)


def curvature(imm: ProductImmersion, frame: PointFrame, X, Y, Z, T) -> float:
    return curvature_tensor(second_fundamental_form(imm, frame).alpha_g, X, Y, Z, T)


def sectional(imm: ProductImmersion, frame: PointFrame, X, Y) -> float:
    return sectional_curvature(second_fundamental_form(imm, frame).alpha_g, X, Y)


def holomorphic(imm: ProductImmersion, frame: PointFrame, S) -> float:
    return holomorphic_curvature(second_fundamental_form(imm, frame).alpha_g, frame.J, S)


def ricci(imm: ProductImmersion, frame: PointFrame, S) -> float:
    return ricci_curvature(second_fundamental_form(imm, frame).alpha_g, S)


def product_curvature(imm: ProductImmersion, frame: PointFrame, X, Y, Z, T) -> float:
    """Closed-form curvature of the Riemannian product: Σ c_i (⟨X_i,T_i⟩⟨Y_i,Z_i⟩ − ⟨X_i,Z_i⟩⟨Y_i,T_i⟩)."""
    X, Y, Z, T = (np.asarray(a, dtype=float) for a in (X, Y, Z, T))
    total = 0.0
    for factor, idx in zip(imm.factors, factor_planes(imm)):
        x, y, z, t = X[idx], Y[idx], Z[idx], T[idx]
        total += factor.curvature * ((x @ t) * (y @ z) - (x @ z) * (y @ t))
    return float(total)


@dataclass(frozen=True, eq=False)
class FlatSubspaceWitness:
    V: Subspace
    ell: int
    bound: int
    holomorphic: np.ndarray
    ricci: np.ndarray
    j_invariant: bool


def flat_subspace_witness(
    imm: ProductImmersion,
    frame: PointFrame,
    samples: int = CURVATURE_SAMPLES,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> FlatSubspaceWitness:
    """J-invariant V^{2ℓ} ⊂ T_xM, ℓ ≥ n − p + 1, on which K(S,JS) ≤ 0 and Ric(S) ≤ 0."""
    p = imm.codimension
    if p > imm.n - 2:
        raise HypothesisViolated(f"codimension {p} exceeds n − 2 = {imm.n - 2}")
    pair = kaehler_pair_at(imm, frame, tol)
    analysis = span_analysis(pair, tol)
    if not analysis.degenerate:
        raise HypothesisViolated("𝒮(β) is nondegenerate")
    split = degenerate_split(pair, analysis, tol)
    umbilical = umbilical_analysis(pair, split, samples, seed, tol)

    V = umbilical.P
    alpha = pair.alpha
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((samples, V.rank)) @ V.basis.T
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    K = np.array([holomorphic_curvature(alpha, pair.J, S) for S in vectors])
    Ric = np.array([ricci_curvature(alpha, S) for S in vectors])
    invariant = V.contains(pair.J.matrix @ V.basis, tol)
    return FlatSubspaceWitness(V, V.rank // 2, imm.n - p + 1, K, Ric, invariant)


@dataclass(frozen=True, eq=False)
class PositiveHolomorphicWitness:
    V: Subspace
    m: int
    codimension: int
    holomorphic: np.ndarray
    j_invariant: bool

    @property
    def min_holomorphic(self) -> float:
        return float(self.holomorphic.min()) if self.holomorphic.size else 0.0


def positive_holomorphic_witness(
    imm: ProductImmersion,
    frame: PointFrame,
    samples: int = CURVATURE_SAMPLES,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> PositiveHolomorphicWitness:
    """Sum of the sphere-factor planes, with K(S,JS) sampled on it.

    On a product of umbilical surfaces every nonzero S in this subspace has
    K(S,JS) = Σ c_i|S_i|⁴ / |S|⁴ > 0.
    """
    planes = [plane for factor, plane in zip(imm.factors, factor_planes(imm)) if factor.kind == SPHERE]
    if not planes:
        raise HypothesisViolated("no sphere factor carries positive holomorphic curvature")
    eye = np.eye(2 * imm.n)
    V = Subspace.span(QuadSpace.euclidean(2 * imm.n), eye[:, np.concatenate(planes)], tol)

    alpha = second_fundamental_form(imm, frame).alpha_g
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((samples, V.rank)) @ V.basis.T
    vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
    K = np.array([holomorphic_curvature(alpha, frame.J, S) for S in vectors])
    invariant = V.contains(frame.J.matrix @ V.basis, tol)
    logger.debug("positive holomorphic subspace of dimension %d, min K %.3e", V.rank, K.min())
    return PositiveHolomorphicWitness(V, V.rank // 2, imm.codimension, K, invariant)


@dataclass(frozen=True, eq=False)
class EigenSplit:
    parts: list[tuple[Subspace, np.ndarray]]
    commutator_defect: float
    reconstruction_defect: float


def eigen_split(imm: ProductImmersion, frame: PointFrame, seed: int = 0, tol: float = DEFAULT_TOL) -> EigenSplit:
    """Common eigenspaces F_i of the shape operators A_ξ, ξ ∈ N_gM, with the
    normals η_i such that A_ξ|F_i = ⟨ξ, η_i⟩ I."""
    sff = second_fundamental_form(imm, frame)
    signs = np.diag(sff.alpha_g.target.gram)
    shapes = [signs[k] * sff.alpha_g.tensor[:, :, k] for k in range(signs.size)]
    scale = max(1.0, max(float(np.abs(A).max()) for A in shapes)) ** 2
    commutator = max(float(np.abs(A @ B - B @ A).max()) for A in shapes for B in shapes)
    if commutator > tol * scale:
        raise NotFlatNormalBundle(f"shape operators do not commute: defect {commutator:.3e}")

    rng = np.random.default_rng(seed)
    combined = sum(c * A for c, A in zip(rng.standard_normal(len(shapes)), shapes))
    eigenvalues, eigenvectors = linalg.eigh(combined)
    gap = 1e-6 * max(1.0, float(np.abs(eigenvalues).max()))
    clusters, start = [], 0
    for i in range(1, eigenvalues.size + 1):
        if i == eigenvalues.size or eigenvalues[i] - eigenvalues[i - 1] > gap:
            clusters.append(eigenvectors[:, start:i])
            start = i

    domain = QuadSpace.euclidean(2 * imm.n)
    Ng = frame.normal_frame_g
    parts = []
    rebuilt = [np.zeros_like(A) for A in shapes]
    for basis in clusters:
        values = np.array([np.trace(basis.T @ A @ basis) / basis.shape[1] for A in shapes])
        eta = Ng @ (signs * values)
        parts.append((Subspace(domain, basis), eta))
        for k, value in enumerate(values):
            rebuilt[k] = rebuilt[k] + value * basis @ basis.T
    reconstruction = max(float(np.abs(A - R).max()) for A, R in zip(shapes, rebuilt))
    logger.debug("eigen split: %d distributions of dimensions %s", len(parts), [p[0].rank for p in parts])
    return EigenSplit(parts, commutator, reconstruction)


def tangent_vector(imm: ProductImmersion, frame: PointFrame, X) -> np.ndarray:
    return frame.tangent_frame @ np.asarray(X, dtype=float)


def geodesic(imm: ProductImmersion, frame: PointFrame, X, t: float) -> np.ndarray:
    """exp(tX) of the product metric, as a point of the ambient space."""
    V = frame.chart_tangent @ np.asarray(X, dtype=float)
    x = frame.chart_point
    blocks = []
    for i, factor in enumerate(imm.factors):
        rows = slice(3 * i, 3 * i + 3)
        blocks.append(factor.geodesic(x[rows], V[rows], t))
    k = len(imm.factors)
    blocks.append(x[3 * k :] + t * V[3 * k :])
    point = np.concatenate(blocks)
    return horosphere_chart(point) if imm.horospherical else point


def reference_point(imm: ProductImmersion, frame: PointFrame, distance: float) -> np.ndarray:
    """cosh(d) f(x) + sinh(d) n₁: at hyperbolic distance d along the first f-normal."""
    return np.cosh(distance) * frame.position + np.sinh(distance) * frame.normal_frame_f[:, 0]


@dataclass(frozen=True)
class HessianCheck:
    analytic: float
    numeric: float
    distance: float

    @property
    def relative_error(self) -> float:
        return abs(self.analytic - self.numeric) / max(1.0, abs(self.analytic))


def _distance_function(imm: ProductImmersion, base_point: np.ndarray):
    G = imm.ambient.gram
    return lambda y: -float(y @ G @ base_point)


def hessian_check(
    imm: ProductImmersion,
    frame: PointFrame,
    X,
    base_point: np.ndarray,
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
) -> HessianCheck:
    """Hess h(X,X) for h = cosh(r) = −⟨·, o⟩ restricted to M: analytic
    cosh r‖X‖² + sinh r⟨grad r, α^f(X,X)⟩ against a central second difference
    along the geodesic of M in direction X."""
    X = np.asarray(X, dtype=float)
    ambient = imm.ambient
    y, o = frame.position, np.asarray(base_point, dtype=float)
    h = _distance_function(imm, o)
    cosh_r = h(y)
    if cosh_r - 1.0 <= tol:
        raise ReferencePointCoincides("reference point coincides with f(x)")

    sff = second_fundamental_form(imm, frame)
    norm2 = float(X @ X)
    alpha_f = np.einsum("a,b,abk->k", X, X, sff.ambient_tensor) - norm2 * y
    analytic = cosh_r * norm2 + ambient.inner(cosh_r * y - o, alpha_f)
    numeric = (h(geodesic(imm, frame, X, step)) - 2.0 * h(y) + h(geodesic(imm, frame, X, -step))) / step**2
    return HessianCheck(float(analytic), float(numeric), float(np.arccosh(cosh_r)))


@dataclass(frozen=True, eq=False)
class UmbilicalNormal:
    eta: np.ndarray
    coefficients: np.ndarray
    residual: float


def umbilical_normal(imm: ProductImmersion, frame: PointFrame, tol: float = DEFAULT_TOL) -> UmbilicalNormal:
    """η ∈ N_fM with A_η = I, by least squares over the f-normal frame."""
    sff = second_fundamental_form(imm, frame)
    signs = np.diag(sff.alpha_f.target.gram)
    shapes = np.stack([signs[k] * sff.alpha_f.tensor[:, :, k] for k in range(signs.size)], axis=-1)
    n2 = shapes.shape[0]
    system = shapes.reshape(n2 * n2, -1)
    coefficients, *_ = np.linalg.lstsq(system, np.eye(n2).ravel(), rcond=None)
    residual = float(np.abs(system @ coefficients - np.eye(n2).ravel()).max())
    if residual > tol * max(1.0, float(np.abs(system).max())):
        raise NoUmbilicalNormal(f"no normal with A_η = I: residual {residual:.3e}")
    return UmbilicalNormal(frame.normal_frame_f @ coefficients, coefficients, residual)


@dataclass(frozen=True)
class HessianPairCheck:
    lhs: float
    rhs: float

    @property
    def relative_error(self) -> float:
        return abs(self.lhs - self.rhs) / max(1.0, abs(self.rhs))


def hessian_pair_check(
    imm: ProductImmersion,
    frame: PointFrame,
    S,
    base_point: np.ndarray,
    step: float = DEFAULT_STEP,
    tol: float = DEFAULT_TOL,
) -> HessianPairCheck:
    """Hess h(S,S) + Hess h(JS,JS) against 2‖S‖²(cosh r + sinh r⟨grad r, η⟩)
    for S in the flat part and η the umbilical normal."""
    S = np.asarray(S, dtype=float)
    first = hessian_check(imm, frame, S, base_point, step, tol)
    second = hessian_check(imm, frame, frame.J.apply(S), base_point, step, tol)
    eta = umbilical_normal(imm, frame, tol).eta
    y, o = frame.position, np.asarray(base_point, dtype=float)
    cosh_r = np.cosh(first.distance)
    rhs = 2.0 * float(S @ S) * (cosh_r + imm.ambient.inner(cosh_r * y - o, eta))
    return HessianPairCheck(first.numeric + second.numeric, float(rhs))


def parallel_normal_check(
    imm: ProductImmersion, params, step: float = DEFAULT_STEP, tol: float = DEFAULT_TOL
) -> float:
    """Largest normal-connection derivative |∇⊥_{∂_k} η| / |∂_k| of the
    umbilical normal, by central differences in the chart parameters."""
    params = np.asarray(params, dtype=float)
    frame = frame_at(imm, params)
    umbilical_normal(imm, frame, tol)
    G = imm.ambient.gram
    Nf = frame.normal_frame_f
    signs = np.sign(np.einsum("mk,mn,nk->k", Nf, G, Nf))
    D = coordinate_derivatives(imm, params)
    speeds = np.sqrt(np.einsum("mk,mn,nk->k", D, imm.chart_space.gram, D))
    worst = 0.0
    for k in range(imm.param_dim):
        offset = np.zeros_like(params)
        offset[k] = step
        forward = umbilical_normal(imm, frame_at(imm, params + offset), tol).eta
        backward = umbilical_normal(imm, frame_at(imm, params - offset), tol).eta
        derivative = (forward - backward) / (2.0 * step)
        normal_part = signs * (derivative @ G @ Nf)
        worst = max(worst, float(np.linalg.norm(normal_part)) / speeds[k])
    return worst
