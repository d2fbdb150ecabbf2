import numpy as np
import pytest
from scipy import linalg

from kaehler_toolkit.bilinear import BilinearMap, evaluate, find_regular_element, left_map, right_kernel
from kaehler_toolkit.errors import (
    BadCorank,
    DegenerateSpan,
    HypothesisViolated,
    InvalidForm,
    NotDegenerate,
    RecursionFailed,
    ShapeIdViolation,
)
from kaehler_toolkit.geometry import factor_planes, frame_at, kaehler_pair_at, make_example1, random_params
from kaehler_toolkit.kaehler_forms import (
    ComplexStructure,
    build_pair,
    compatibility_defect,
    corank2_element,
    degenerate_split,
    diagonal_residuals,
    diagonalize,
    kercod2_split,
    kernel_bound_check,
    kernel_is_j_invariant,
    kernel_lightlike,
    left_image_structure,
    restrict_pair,
    sampled_degenerate_subspace_check,
    sectional_curvature,
    span_analysis,
    symmetry_report,
    umbilical_analysis,
    zero_product_pair,
)
from kaehler_toolkit.pseudo_linear import QuadSpace
from kaehler_toolkit.suites import random_pair


def example_pair(radii=(2.0, 1.0, np.sqrt(2.0)), seed=0):
    imm = make_example1(radii)
    frame = frame_at(imm, random_params(imm, np.random.default_rng(seed)))
    return imm, kaehler_pair_at(imm, frame)


def padded_pair(radii=(np.sqrt(2.0), 1.0), extra=1):
    """α ⊕ 0 on V ⊕ C^extra: flat and surjective but with 𝒩(β) ≠ 0."""
    _, pair = example_pair(radii)
    n2 = 2 * pair.n + 2 * extra
    tensor = np.zeros((n2, n2, pair.p))
    tensor[: 2 * pair.n, : 2 * pair.n] = pair.alpha.tensor
    J = linalg.block_diag(pair.J.matrix, ComplexStructure.standard(extra).matrix)
    return build_pair(BilinearMap(tensor, pair.alpha.target), ComplexStructure(J))


def umbilic_pair(n):
    """α(X, Y) = (X, Y)(e₁ + w) into L² with w = e₂; the span of β is degenerate."""
    target = QuadSpace.lorentzian(2)
    tensor = np.zeros((2 * n, 2 * n, 2))
    tensor[..., 0] = np.eye(2 * n)
    tensor[..., 1] = np.eye(2 * n)
    return build_pair(BilinearMap(tensor, target), ComplexStructure.standard(n), None, np.array([0.0, 1.0]))


def test_zero_alpha_gives_zero_beta_and_gamma():
    pair = build_pair(BilinearMap.zero(4, QuadSpace.lorentzian(2)), ComplexStructure.standard(2))
    assert not pair.beta.tensor.any()
    assert not pair.gamma.tensor.any()
    analysis = span_analysis(pair)
    assert analysis.s == 0
    assert not analysis.degenerate
    assert analysis.v is None


def test_anti_holomorphic_alpha_has_zero_beta():
    tensor = np.zeros((2, 2, 1))
    tensor[0, 0, 0], tensor[1, 1, 0] = 1.0, -1.0
    pair = build_pair(BilinearMap(tensor, QuadSpace.euclidean(1)), ComplexStructure.standard(1))
    assert np.abs(pair.beta.tensor).max() == 0


def test_build_pair_validates_inputs():
    alpha = BilinearMap(np.eye(2)[..., None], QuadSpace.lorentzian(1))
    with pytest.raises(InvalidForm):
        ComplexStructure(np.eye(2))
    with pytest.raises(InvalidForm):
        build_pair(BilinearMap(np.arange(8.0).reshape(2, 2, 2), QuadSpace.lorentzian(2)), ComplexStructure.standard(1))
    with pytest.raises(ShapeIdViolation):
        build_pair(BilinearMap(2.0 * np.eye(2)[..., None], QuadSpace.lorentzian(1)), ComplexStructure.standard(1), None, np.ones(1))
    pair = build_pair(alpha, ComplexStructure.standard(1), None, np.ones(1))
    assert pair.n == 1
    assert pair.p == 1


def test_beta_symmetries_and_w_pairing_on_random_pairs():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pair = random_pair(2, 3, rng, 1e-9)
        assert symmetry_report(pair) <= 1e-12 * pair.beta.entry_scale()
        assert kernel_is_j_invariant(pair)
        assert right_kernel(pair.beta).rank == 0
        X, Y = rng.standard_normal((2, 4))
        w_slot = np.concatenate([pair.w, np.zeros(3)])
        paired = pair.doubled.whole.inner(evaluate(pair.beta, X, Y), w_slot)
        assert paired == pytest.approx(-2.0 * float(X @ Y), abs=1e-10)
        assert span_analysis(pair).equality_defect <= 1e-9


def test_kernel_is_j_invariant_when_nonzero():
    pair = padded_pair()
    kernel = right_kernel(pair.beta)
    assert kernel.rank == 2
    assert kernel_is_j_invariant(pair)


def test_example_span_is_nondegenerate_of_full_dimension():
    _, pair = example_pair()
    analysis = span_analysis(pair)
    assert analysis.s == pair.n == 3
    assert not analysis.degenerate
    with pytest.raises(NotDegenerate):
        degenerate_split(pair, analysis)


def test_umbilic_form_splits_with_zero_remainder():
    pair = umbilic_pair(2)
    analysis = span_analysis(pair)
    assert analysis.degenerate
    assert analysis.s == 1
    split = degenerate_split(pair, analysis)
    assert np.allclose(split.v, [1.0, 1.0])
    assert split.residual <= 1e-12
    assert np.abs(split.beta1.tensor).max() <= 1e-12
    assert split.kernel1.rank == 4
    assert split.bound == 4
    assert split.bound_holds

    umbilical = umbilical_analysis(pair, split, samples=50)
    assert umbilical.umbilic_residual <= 1e-12
    assert umbilical.alphapar_residual <= 1e-12
    assert umbilical.m == 2
    assert np.abs(umbilical.K_values).max() <= 1e-10
    assert np.abs(umbilical.Ric_values).max() <= 1e-10


def test_umbilical_analysis_needs_small_span():
    pair = umbilic_pair(1)
    split = degenerate_split(pair)
    with pytest.raises(HypothesisViolated):
        umbilical_analysis(pair, split)


def test_compatibility_of_geometric_and_generic_forms():
    _, pair = example_pair()
    assert compatibility_defect(pair) <= 1e-9
    zero = build_pair(BilinearMap.zero(4, QuadSpace.lorentzian(2)), ComplexStructure.standard(2))
    assert compatibility_defect(zero) == 0
    generic = random_pair(2, 3, np.random.default_rng(5), 1e-9)
    assert compatibility_defect(generic) > 1e-6


def test_kernel_lightlike_needs_a_kernel():
    _, pair = example_pair()
    with pytest.raises(HypothesisViolated):
        kernel_lightlike(pair)


def test_kernel_lightlike_recovers_the_null_direction():
    pair = umbilic_pair(2)
    witness = kernel_lightlike(pair)
    assert np.allclose(witness.v, np.array([1.0, 1.0]) / np.sqrt(2))
    assert abs(pair.alpha.target.inner(witness.v, witness.v)) <= 1e-12
    assert witness.inclusion_defect <= 1e-12
    assert witness.orthogonality_defect <= 1e-12
    assert witness.null_pairs_checked > 0
    assert witness.null_pair_defect <= 1e-9


def test_kernel_bound_on_example_and_padded_forms():
    _, pair = example_pair()
    result = kernel_bound_check(pair)
    assert result.kernel_dim == 0
    assert result.bound == 0
    assert result.isomorphism
    assert result.holds

    padded = kernel_bound_check(padded_pair())
    assert padded.kernel_dim == padded.bound == 2
    assert padded.isomorphism is None


def test_kernel_bound_needs_surjective_beta():
    zero = build_pair(BilinearMap.zero(4, QuadSpace.lorentzian(2)), ComplexStructure.standard(2))
    with pytest.raises(HypothesisViolated):
        kernel_bound_check(zero)


def test_zero_product_pair_on_example():
    _, pair = example_pair()
    X, Y = zero_product_pair(pair)
    assert np.linalg.norm(X) == pytest.approx(1.0)
    assert np.linalg.norm(Y) == pytest.approx(1.0)
    assert np.linalg.norm(evaluate(pair.beta, X, Y)) <= 1e-8 * pair.beta.entry_scale()

    line = build_pair(BilinearMap(np.eye(2)[..., None], QuadSpace.lorentzian(1)), ComplexStructure.standard(1))
    with pytest.raises(HypothesisViolated):
        zero_product_pair(line)


def test_zero_product_pair_on_two_blocks():
    _, pair = example_pair()
    sub, _ = restrict_pair(pair, np.eye(2 * pair.n)[:, :4])
    assert sub.n == 2
    X, Y = zero_product_pair(sub)
    assert np.linalg.norm(X) == pytest.approx(1.0)
    assert np.linalg.norm(Y) == pytest.approx(1.0)
    assert np.linalg.norm(evaluate(sub.beta, X, Y)) <= 1e-8 * sub.beta.entry_scale()


def test_corank_two_element_for_a_single_pair():
    _, pair = example_pair()
    sub, _ = restrict_pair(pair, np.eye(2 * pair.n)[:, :2])
    Z = corank2_element(sub)
    assert np.linalg.norm(Z) == pytest.approx(1.0)
    assert left_map(sub.beta, Z).kernel().rank == 0
    values = np.column_stack([evaluate(sub.beta, Z, Z), evaluate(sub.beta, Z, sub.J.apply(Z))])
    assert np.linalg.matrix_rank(values) == 2


def test_corank_two_element_and_split():
    _, pair = example_pair()
    Z = corank2_element(pair)
    assert left_map(pair.beta, Z).kernel().rank == 2 * pair.n - 2
    split = kercod2_split(pair, Z)
    assert split.bzv.rank == 2
    assert split.rest.rank == 2 * pair.n - 2
    assert split.cross_defect <= 1e-10
    assert split.nondegenerate
    assert split.sum_defect <= 1e-9


def test_corank_split_rejects_regular_elements():
    _, pair = example_pair()
    X, _ = find_regular_element(pair.beta)
    with pytest.raises(BadCorank):
        kercod2_split(pair, X)


def test_left_image_structure_at_regular_element():
    _, pair = example_pair()
    X, _ = find_regular_element(pair.beta)
    doubled, symmetric = left_image_structure(pair, X)
    assert doubled <= 1e-9
    assert symmetric <= 1e-9


def test_no_degenerate_restrictions_are_sampled_on_example():
    _, pair = example_pair()
    assert sampled_degenerate_subspace_check(pair, samples=20) == 0


def test_diagonalize_single_pair():
    alpha = BilinearMap(np.eye(2)[..., None], QuadSpace.lorentzian(1))
    pair = build_pair(alpha, ComplexStructure.standard(1), None, np.ones(1))
    basis = diagonalize(pair)
    assert basis.n == 1
    assert np.allclose(basis.pairs[0], [1.0, 0.0])
    assert basis.norms.tolist() == [-1.0]
    residuals = diagonal_residuals(pair, basis)
    assert residuals.off_diagonal == 0
    assert np.allclose(residuals.gram, np.diag([-1.0, 1.0]))


def test_diagonalize_example_aligns_with_factor_planes():
    imm, pair = example_pair()
    basis = diagonalize(pair)
    residuals = diagonal_residuals(pair, basis)
    assert residuals.off_diagonal <= 1e-8
    assert residuals.gram_defect <= 1e-8
    assert basis.norms[0] == -1

    for X, JX in zip(basis.pairs, basis.partners):
        plane = np.column_stack([X, JX])
        angles = [np.max(linalg.subspace_angles(plane, np.eye(2 * imm.n)[:, idx])) for idx in factor_planes(imm)]
        assert min(angles) <= 1e-7


def test_diagonalize_is_deterministic():
    _, pair = example_pair()
    first = diagonalize(pair, seed=4)
    second = diagonalize(pair, seed=4)
    assert np.array_equal(first.pairs, second.pairs)
    assert np.array_equal(first.norms, second.norms)


def test_diagonalize_rejects_kernel_and_degenerate_span():
    with pytest.raises(HypothesisViolated):
        diagonalize(padded_pair())
    with pytest.raises(DegenerateSpan):
        diagonalize(umbilic_pair(2))


def test_restrict_pair_needs_j_invariant_subspace():
    _, pair = example_pair()
    basis = np.eye(2 * pair.n)[:, [0, 2]]
    with pytest.raises(RecursionFailed):
        restrict_pair(pair, basis)
    sub, E = restrict_pair(pair, np.eye(2 * pair.n)[:, [0, 1]])
    assert sub.n == 1
    assert np.allclose(E.T @ E, np.eye(2))


def test_sectional_curvature_on_factor_planes():
    imm, pair = example_pair()
    eye = np.eye(2 * imm.n)
    for factor, (a, b) in zip(imm.factors, factor_planes(imm)):
        assert sectional_curvature(pair.alpha, eye[a], eye[b]) == pytest.approx(factor.curvature, abs=1e-9)
    assert sectional_curvature(pair.alpha, eye[0], eye[2]) == pytest.approx(0.0, abs=1e-9)
