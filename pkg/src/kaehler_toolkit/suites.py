"""Verification batteries driven by the cli: the product-of-surfaces battery,
the horosphere battery and the seeded algebraic sweep."""

from __future__ import annotations

import logging
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from scipy import linalg, stats

from .bilinear import BilinearMap, evaluate, find_regular_element, flatness_report, moore_verify, right_kernel
from .config import SuiteConfig
from .errors import InvalidForm, NoUmbilicalNormal
from .formfile import FormFile, save_basis, save_form
from .geometry import (
    ProductImmersion,
    PointFrame,
    analytic_metric,
    coordinate_derivatives,
    curvature,
    eigen_split,
    factor_planes,
    flat_indices,
    flat_subspace_witness,
    frame_at,
    geodesic,
    hessian_check,
    hessian_pair_check,
    holomorphic,
    horosphere_chart,
    horosphere_differential,
    kaehler_pair_at,
    make_example1,
    make_horosphere_composition,
    parallel_normal_check,
    positive_holomorphic_witness,
    product_curvature,
    random_params,
    reference_point,
    ricci,
    second_fundamental_form,
    sectional,
    umbilical_normal,
)
from .kaehler_forms import (
    ComplexStructure,
    KaehlerPair,
    build_pair,
    compatibility_defect,
    curvature_tensor,
    degenerate_split,
    diagonal_residuals,
    diagonalize,
    kernel_bound_check,
    kernel_is_j_invariant,
    kernel_lightlike,
    nondegenerate_kernel_bound,
    span_analysis,
    symmetry_report,
    umbilical_analysis,
)
from .pseudo_linear import (
    QuadSpace,
    Subspace,
    decompose_degenerate,
    numerical_rank,
    orthogonal_complement,
    radical,
)
from .reports import Report, export_report

logger = logging.getLogger(__name__)


def _finish(report: Report, started: float) -> Report:
    report.runtime_ms = int(round((time.perf_counter() - started) * 1000))
    logger.info("%s suite: %d checks, %d failed", report.suite, len(report.checks), len(report.failures()))
    return report


def _max_angle(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.max(linalg.subspace_angles(A, B)))


def _frame_checks(report: Report, imm: ProductImmersion, frame: PointFrame) -> None:
    G = imm.ambient.gram
    T, Nf, y = frame.tangent_frame, frame.normal_frame_f, frame.position
    report.add("position_norm", abs(float(y @ G @ y) + 1.0), 1e-12)
    report.add("tangent_orthonormal", float(np.abs(T.T @ G @ T - np.eye(T.shape[1])).max()), 1e-10)
    report.add("normal_orthonormal", float(np.abs(Nf.T @ G @ Nf - np.eye(Nf.shape[1])).max()), 1e-10)
    report.add("normal_orthogonal", float(np.abs(T.T @ G @ frame.normal_frame_g).max()), 1e-10)
    D = coordinate_derivatives(imm, frame.params)
    pullback = D.T @ imm.chart_space.gram @ D
    report.add("metric_compatibility", float(np.abs(pullback - analytic_metric(imm, frame.params)).max()), 1e-10)
    J = frame.J.matrix
    report.add("complex_structure", float(np.abs(J @ J + np.eye(J.shape[0])).max()), 1e-12)


def _pair_checks(report: Report, pair: KaehlerPair, tol: float) -> None:
    flat = flatness_report(pair.beta, tol)
    report.add("beta_flatness", flat.max_defect, flat.tolerance)
    scale = pair.beta.entry_scale() * pair.gamma.entry_scale()
    report.add("beta_gamma_compatibility", compatibility_defect(pair), tol * scale)
    report.add("beta_symmetries", symmetry_report(pair), tol * pair.beta.entry_scale())


def _kaehler_commutation(report: Report, pair: KaehlerPair, rng: np.random.Generator, samples: int = 5) -> None:
    J = pair.J
    for _ in range(samples):
        X, Y, Z, T = rng.standard_normal((4, 2 * pair.n))
        lhs = curvature_tensor(pair.alpha, X, Y, J.apply(Z), J.apply(T))
        report.add("curvature_commutes_with_J", abs(lhs - curvature_tensor(pair.alpha, X, Y, Z, T)), 1e-9)


def _export_forms(pair: KaehlerPair, out: Path) -> None:
    save_form(FormFile.from_pair(pair, "alpha"), out / "alpha.json")
    save_form(FormFile.from_pair(pair, "beta"), out / "beta.json")


def run_example_suite(radii, config: SuiteConfig | None = None, out: str | Path | None = None) -> Report:
    config = config or SuiteConfig()
    started = time.perf_counter()
    imm = make_example1(radii, tol=config.tol)
    report = Report("example", config.seed)
    rng = np.random.default_rng(config.seed)
    n, tol = imm.n, config.tol
    planes = factor_planes(imm)
    eye = np.eye(2 * n)
    curvatures = [f.curvature for f in imm.factors]
    report.add("curvature_constraint", abs(sum(1.0 / c for c in curvatures) + 1.0), 1e-12)
    for k, c in enumerate(curvatures, 1):
        report.values[f"c_{k}"] = c

    first_pair = None
    for _ in range(config.points):
        frame = frame_at(imm, random_params(imm, rng))
        _frame_checks(report, imm, frame)
        pair = kaehler_pair_at(imm, frame, tol)
        first_pair = first_pair or pair
        _pair_checks(report, pair, tol)
        _kaehler_commutation(report, pair, rng)

        analysis = span_analysis(pair, tol)
        report.add("span_dimension", abs(analysis.s - n), 0.0)
        report.require("span_nondegenerate", not analysis.degenerate)
        report.add("span_equality", analysis.equality_defect, tol)
        report.require("regular_isomorphism", bool(kernel_bound_check(pair, config.seed, tol).isomorphism))

        basis = diagonalize(pair, config.seed, tol)
        residuals = diagonal_residuals(pair, basis)
        report.add("diagonal_off_blocks", residuals.off_diagonal, 1e-8)
        report.add("diagonal_gram", residuals.gram_defect, 1e-8)
        alignment = max(
            min(_max_angle(np.column_stack([X, JX]), eye[:, plane]) for plane in planes)
            for X, JX in zip(basis.pairs, basis.partners)
        )
        report.add("diagonal_plane_angles", alignment, 1e-7)

        sff = second_fundamental_form(imm, frame)
        G = imm.ambient.gram
        for j, (factor, plane) in enumerate(zip(imm.factors, planes), 1):
            X = eye[plane[0]]
            K = holomorphic(imm, frame, X)
            report.values[f"K_{j}"] = round(float(K), 12)
            report.add("holomorphic_curvature", abs(K - factor.curvature), 1e-9)
            report.add("ricci_curvature", abs(ricci(imm, frame, X) - factor.curvature), 1e-9)
            shape = np.einsum("abm,mn,n->ab", sff.ambient_tensor, G, frame.chart_normals[j - 1])
            report.add("g_shape_rank", abs(numerical_rank(shape, tol) - 2), 0.0)
        for a in range(len(planes)):
            for b in range(a + 1, len(planes)):
                mixed = sectional(imm, frame, eye[planes[a][0]], eye[planes[b][0]])
                report.add("mixed_sectional", abs(mixed), 1e-10)
        positive = positive_holomorphic_witness(imm, frame, config.curvature_samples, config.seed, tol)
        report.add("positive_witness_dimension", abs(positive.V.rank - 2 * positive.codimension), 0.0)
        report.require("positive_witness_j_invariant", positive.j_invariant)
        report.at_least("positive_holomorphic_curvature", positive.min_holomorphic, 1e-9)
        previous = report.values.get("min_positive_K", np.inf)
        report.values["min_positive_K"] = min(previous, round(positive.min_holomorphic, 12))
        X, Y, Z, T = rng.standard_normal((4, 2 * n))
        gauss = curvature(imm, frame, X, Y, Z, T)
        report.add("gauss_product_curvature", abs(gauss - product_curvature(imm, frame, X, Y, Z, T)), 1e-9)

        split = eigen_split(imm, frame, config.seed, tol)
        report.add("shape_commutators", split.commutator_defect, 1e-10)
        report.add("shape_reconstruction", split.reconstruction_defect, 1e-9)
        report.add("eigen_count", abs(len(split.parts) - n), 0.0)
        report.add(
            "eigen_plane_angles",
            max(min(_max_angle(F.basis, eye[:, plane]) for plane in planes) for F, _ in split.parts),
            1e-7,
        )
        etas = [eta for _, eta in split.parts]
        cross = [abs(float(a @ G @ b)) for i, a in enumerate(etas) for b in etas[i + 1 :]]
        report.add("eigen_normals_orthogonal", max(cross, default=0.0), 1e-10)

        X = rng.standard_normal(2 * n)
        step = config.step
        acceleration = (
            geodesic(imm, frame, X, step) - 2.0 * frame.position + geodesic(imm, frame, X, -step)
        ) / step**2
        expected = np.einsum("a,b,abk->k", X, X, sff.ambient_tensor)
        relative = float(np.linalg.norm(acceleration - expected)) / max(1.0, float(np.linalg.norm(expected)))
        report.add("geodesic_acceleration", relative, config.hessian_tol)

        try:
            umbilical_normal(imm, frame, tol)
            report.require("no_umbilical_normal", False)
        except NoUmbilicalNormal:
            report.require("no_umbilical_normal", True)

    _hessian_battery(report, imm, rng, config)
    if out is not None:
        _export_forms(first_pair, Path(out))
        export_report(_finish(report, started), out)
    return _finish(report, started)


def _hessian_battery(report: Report, imm: ProductImmersion, rng: np.random.Generator, config: SuiteConfig) -> None:
    for index in range(config.hessian_points):
        frame = frame_at(imm, random_params(imm, rng))
        base = reference_point(imm, frame, float(rng.uniform(0.5, 1.5)))
        X = rng.standard_normal(2 * imm.n)
        X /= np.linalg.norm(X)
        check = hessian_check(imm, frame, X, base, config.step, config.tol)
        report.add("hessian_relative", check.relative_error, config.hessian_tol)
        if index == 0:
            zero = hessian_check(imm, frame, np.zeros(2 * imm.n), base, config.step, config.tol)
            report.add("hessian_zero_vector", max(abs(zero.analytic), abs(zero.numeric)), 0.0)


def run_horosphere_suite(n: int, config: SuiteConfig | None = None, out: str | Path | None = None) -> Report:
    config = config or SuiteConfig()
    started = time.perf_counter()
    imm = make_horosphere_composition(n)
    report = Report("horosphere", config.seed)
    rng = np.random.default_rng(config.seed)
    tol, p = config.tol, imm.codimension
    G = imm.ambient.gram
    flat = flat_indices(imm)

    first_pair = None
    for _ in range(config.points):
        params = random_params(imm, rng)
        frame = frame_at(imm, params)
        _frame_checks(report, imm, frame)
        x = frame.chart_point
        psi = horosphere_chart(x)
        report.add("horosphere_norm", abs(float(psi @ G @ psi) + 1.0), 1e-12)
        dpsi = horosphere_differential(x)
        report.add("horosphere_pullback", float(np.abs(dpsi.T @ G @ dpsi - np.eye(x.size)).max()), 1e-12)

        pair = kaehler_pair_at(imm, frame, tol)
        first_pair = first_pair or pair
        _pair_checks(report, pair, tol)

        analysis = span_analysis(pair, tol)
        report.require("span_degenerate", analysis.degenerate)
        report.add("span_dimension", max(0, analysis.s - p), 0.0)
        report.add("span_equality", analysis.equality_defect, tol)
        report.values["s"] = float(analysis.s)
        bound, kernel_dim = nondegenerate_kernel_bound(pair, p)
        report.require("degeneracy_forced", analysis.degenerate or kernel_dim >= bound)

        signs = np.diag(pair.alpha.target.gram)
        zeta = np.zeros(G.shape[0])
        zeta[0] = zeta[-1] = 1.0
        zeta_coords = signs * (zeta @ G @ frame.normal_frame_g)
        null_line = Subspace.from_vectors(pair.alpha.target, [zeta_coords])
        report.add("lightlike_direction", null_line.containment_defect(analysis.v), 1e-9)

        split = degenerate_split(pair, analysis, tol)
        report.add("beta_decomposition", split.residual, tol)
        report.at_least("split_kernel_bound", split.kernel1.rank, split.bound)

        witness = kernel_lightlike(pair, seed=config.seed, tol=tol)
        report.add("kernel_lightlike_direction", null_line.containment_defect(witness.v), 1e-9)
        report.add("kernel_lightlike_inclusion", max(witness.inclusion_defect, witness.orthogonality_defect), 1e-9)
        report.add("kernel_lightlike_null_pairs", witness.null_pair_defect, 1e-9)

        umbilical = umbilical_analysis(pair, split, config.curvature_samples, config.seed, tol)
        report.add("umbilic", umbilical.umbilic_residual, tol)
        report.add("alpha_parallel_part", umbilical.alphapar_residual, tol)
        report.at_most("holomorphic_functional", umbilical.K_values, 1e-10)
        report.at_most("ricci_functional", umbilical.Ric_values, 1e-10)

        if p <= imm.n - 2:
            flat_witness = flat_subspace_witness(imm, frame, config.curvature_samples, config.seed, tol)
            report.at_least("witness_dimension", flat_witness.ell, flat_witness.bound)
            report.require("witness_j_invariant", flat_witness.j_invariant)
            report.at_most("witness_holomorphic_curvature", flat_witness.holomorphic, 1e-10)
            report.at_most("witness_ricci_curvature", flat_witness.ricci, 1e-10)
            report.values["witness_dim"] = 2 * flat_witness.ell

        normal = umbilical_normal(imm, frame, tol)
        report.add("umbilical_normal", normal.residual, tol)
        report.add("parallel_normal", parallel_normal_check(imm, params, config.step, tol), config.parallel_tol)

        split_eigen = eigen_split(imm, frame, config.seed, tol)
        report.add("shape_commutators", split_eigen.commutator_defect, 1e-10)
        report.add("shape_reconstruction", split_eigen.reconstruction_defect, 1e-9)

        base = reference_point(imm, frame, float(rng.uniform(0.5, 1.5)))
        S = np.zeros(2 * imm.n)
        S[flat] = rng.standard_normal(flat.size)
        S /= np.linalg.norm(S)
        pair_check = hessian_pair_check(imm, frame, S, base, config.step, tol)
        report.add("hessian_pair_relative", pair_check.relative_error, config.hessian_tol)

    _hessian_battery(report, imm, rng, config)
    if out is not None:
        _export_forms(first_pair, Path(out))
        export_report(_finish(report, started), out)
    return _finish(report, started)


def random_pair(n: int, p: int, rng: np.random.Generator, tol: float) -> KaehlerPair:
    """Random symmetric α into L^p whose w-component is the identity, so
    ⟨α(X,Y), w⟩ = −(X,Y), with J conjugated by a random rotation."""
    tensor = rng.standard_normal((2 * n, 2 * n, p))
    tensor = 0.5 * (tensor + tensor.transpose(1, 0, 2))
    tensor[..., -1] = np.eye(2 * n)
    Q = stats.ortho_group.rvs(2 * n, random_state=rng)
    J = Q @ ComplexStructure.standard(n).matrix @ Q.T
    w = np.zeros(p)
    w[-1] = 1.0
    return build_pair(BilinearMap(tensor, QuadSpace.lorentzian(p)), ComplexStructure(J), None, w, tol)


def diagonal_flat_form(A: np.ndarray, target: QuadSpace) -> BilinearMap:
    """φ(X,Y)_k = (a_k·X)(a_k·Y); flat for any diagonal target metric."""
    return BilinearMap(np.einsum("ki,kj->ijk", A, A), target)


def _degenerate_subspace(space: QuadSpace, rng: np.random.Generator, extra: int) -> Subspace:
    null = np.zeros(space.dim)
    null[0] = null[-1] = 1.0
    perp = orthogonal_complement(space, Subspace.from_vectors(space, [null]))
    combos = perp.basis @ rng.standard_normal((perp.rank, extra))
    return Subspace.span(space, np.column_stack([null, combos]))


def run_random_suite(
    dims: tuple[int, int] = (3, 3),
    config: SuiteConfig | None = None,
    corrupt: bool = False,
    out: str | Path | None = None,
) -> Report:
    config = config or SuiteConfig()
    started = time.perf_counter()
    n, p = dims
    if n < 1 or p < 1 or config.trials < 1:
        raise InvalidForm(f"dims and trials must be positive, got dims {dims}, trials {config.trials}")
    report = Report("random", config.seed)
    tol = config.tol

    for trial in range(config.trials):
        rng = np.random.default_rng([config.seed, trial])
        pair = random_pair(n, p, rng, tol)
        if corrupt:
            tensor = pair.beta.tensor.copy()
            tensor[0, 1, 0] += 1.0
            pair = replace(pair, beta=BilinearMap(tensor, pair.beta.target, pair.beta.domain))

        scale = pair.beta.entry_scale()
        report.add("beta_symmetries", symmetry_report(pair), tol * scale)
        report.require("kernel_j_invariant", kernel_is_j_invariant(pair, tol))
        report.require("kernel_trivial_under_shape_identity", right_kernel(pair.beta, tol).rank == 0)
        X, Y = rng.standard_normal((2, 2 * n))
        w_slot = np.concatenate([pair.w, np.zeros(p)])
        paired = pair.doubled.whole.inner(evaluate(pair.beta, X, Y), w_slot)
        bound = tol * scale * (1.0 + float(np.linalg.norm(X) * np.linalg.norm(Y)))
        report.add("beta_pairs_w", abs(paired + 2.0 * float(X @ Y)), bound)

        analysis = span_analysis(pair, tol)
        report.add("span_equality", analysis.equality_defect, tol)
        report.add("span_rank", abs(analysis.span.rank - 2 * analysis.s), 0.0)

        dim = int(rng.integers(3, 7))
        negatives = int(rng.integers(1, dim))
        space = QuadSpace.from_diagonal([1.0] * (dim - negatives) + [-1.0] * negatives)
        L = _degenerate_subspace(space, rng, int(rng.integers(0, dim - 1)))
        decomposition = decompose_degenerate(space, L, tol)
        report.add("decomposition_pairing", decomposition.pairing_defect(), 1e-9)
        report.add("decomposition_cross", decomposition.cross_defect(), 1e-9)
        complement = orthogonal_complement(space, L, tol)
        joint = L.direct_sum(complement, tol)
        report.add("radical_dimension", abs(radical(space, L, tol).rank - (L.rank + complement.rank - joint.rank)), 0.0)

        generic = Subspace.span(space, rng.standard_normal((dim, int(rng.integers(1, dim)))))
        if not generic.is_degenerate(tol):
            double = orthogonal_complement(space, orthogonal_complement(space, generic, tol), tol)
            report.require("complement_involution", double.equals(generic, tol))

        target = QuadSpace.from_diagonal(rng.choice([-1.0, 1.0], size=dim))
        phi = diagonal_flat_form(rng.standard_normal((dim, 3)), target)
        flat = flatness_report(phi, tol)
        report.add("diagonal_form_flatness", flat.max_defect, flat.tolerance)
        regular, _ = find_regular_element(phi, trial, tol=tol)
        report.add("regular_element_inclusion", moore_verify(phi, regular, tol), 1e-9)

    if out is not None:
        export_report(_finish(report, started), out)
    return _finish(report, started)


def check_flat(form: FormFile, tol: float) -> Report:
    started = time.perf_counter()
    report = Report("check-flat", 0)
    flat = flatness_report(form.bilinear_map(), tol)
    report.add("flatness", flat.max_defect, flat.tolerance)
    return _finish(report, started)


def diagonalize_form(form: FormFile, seed: int, tol: float, out: str | Path | None = None) -> Report:
    started = time.perf_counter()
    pair = build_pair(form.bilinear_map(), form.complex_structure(), None, form.w_vector(), tol)
    basis = diagonalize(pair, seed, tol)
    residuals = diagonal_residuals(pair, basis)
    report = Report("diagonalize", seed)
    report.add("diagonal_off_blocks", residuals.off_diagonal, 1e-8)
    report.add("diagonal_gram", residuals.gram_defect, 1e-8)
    report.values["pairs"] = float(basis.n)
    for k, sign in enumerate(basis.norms, 1):
        report.values[f"epsilon_{k}"] = float(sign)
    if out is not None:
        save_basis(basis, Path(out) / "basis.json", tol)
    return _finish(report, started)
