import numpy as np
import pytest

from kaehler_toolkit.bilinear import find_regular_element, flatness_report, left_map, moore_verify
from kaehler_toolkit.errors import (
    ChartDomainError,
    CurvatureConstraintViolated,
    HypothesisViolated,
    InvalidForm,
    NoUmbilicalNormal,
    ReferencePointCoincides,
)
from kaehler_toolkit.geometry import (
    SurfaceImmersion,
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
from kaehler_toolkit.kaehler_forms import compatibility_defect, span_analysis
from kaehler_toolkit.pseudo_linear import Subspace


@pytest.fixture()
def example():
    return make_example1([2.0, 1.0, np.sqrt(2.0)])


@pytest.fixture()
def horosphere():
    return make_horosphere_composition(4)


def frame(imm, seed=0):
    return frame_at(imm, random_params(imm, np.random.default_rng(seed)))


def test_example_curvatures_and_constraint(example):
    assert [round(f.curvature, 12) for f in example.factors] == [-0.25, 1.0, 0.5]
    assert example.n == 3
    assert example.codimension == 2
    make_example1([np.sqrt(2.0), 1.0])
    with pytest.raises(CurvatureConstraintViolated):
        make_example1([1.0, 1.0, 1.0])
    with pytest.raises(CurvatureConstraintViolated):
        make_example1([1.0])


def test_surface_validation_and_chart_domain():
    with pytest.raises(InvalidForm):
        SurfaceImmersion(1.0, "hyperbolic")
    sphere = SurfaceImmersion.sphere(2.0)
    with pytest.raises(ChartDomainError):
        sphere.check_domain(0.05, 1.0)
    with pytest.raises(ChartDomainError):
        SurfaceImmersion.hyperbolic(1.0).check_domain(0.0, 1.0)


def test_frames_are_orthonormal_at_random_points(example):
    G = example.ambient.gram
    for seed in range(100):
        f = frame(example, seed)
        y = f.position
        assert float(y @ G @ y) == pytest.approx(-1.0, abs=1e-12)
        T = f.tangent_frame
        assert np.abs(T.T @ G @ T - np.eye(6)).max() <= 1e-10
        Ng = f.normal_frame_g
        assert np.abs(T.T @ G @ Ng).max() <= 1e-10
        J = f.J.matrix
        assert np.abs(J @ J + np.eye(6)).max() == 0


def test_pullback_metric_matches_closed_form(example):
    rng = np.random.default_rng(1)
    for _ in range(200):
        params = random_params(example, rng)
        D = coordinate_derivatives(example, params)
        pullback = D.T @ example.chart_space.gram @ D
        assert np.abs(pullback - analytic_metric(example, params)).max() <= 1e-10


def test_second_fundamental_form_structure(example):
    f = frame(example)
    sff = second_fundamental_form(example, f)
    assert np.abs(sff.alpha_g.tensor[0, 2]).max() <= 1e-12
    G = example.ambient.gram
    shape_position = np.einsum("abm,mn,n->ab", sff.ambient_tensor, G, f.position)
    assert np.abs(shape_position + np.eye(6)).max() <= 1e-10
    assert sff.alpha_f.target.dim == example.codimension


def test_curvature_values_on_factor_planes(example):
    f = frame(example, 3)
    eye = np.eye(6)
    for factor, (a, b) in zip(example.factors, factor_planes(example)):
        assert sectional(example, f, eye[a], eye[b]) == pytest.approx(factor.curvature, abs=1e-9)
        assert holomorphic(example, f, eye[a]) == pytest.approx(factor.curvature, abs=1e-9)
        assert ricci(example, f, eye[a]) == pytest.approx(factor.curvature, abs=1e-9)
    assert sectional(example, f, eye[0], eye[4]) == pytest.approx(0.0, abs=1e-9)


def test_gauss_curvature_matches_product_formula(example):
    f = frame(example, 4)
    rng = np.random.default_rng(4)
    for _ in range(20):
        X, Y, Z, T = rng.standard_normal((4, 6))
        assert curvature(example, f, X, Y, Z, T) == pytest.approx(
            product_curvature(example, f, X, Y, Z, T), abs=1e-9
        )


def test_example_pairs_are_flat_and_compatible(example):
    for seed in range(50):
        pair = kaehler_pair_at(example, frame(example, seed))
        assert flatness_report(pair.beta).is_flat
        assert compatibility_defect(pair) <= 1e-9


def test_eigen_split_recovers_factor_planes(example):
    f = frame(example, 2)
    split = eigen_split(example, f)
    assert split.commutator_defect <= 1e-10
    assert split.reconstruction_defect <= 1e-9
    assert len(split.parts) == 3
    planes = [np.eye(6)[:, idx] for idx in factor_planes(example)]
    G = example.ambient.gram
    etas = []
    for subspace, eta in split.parts:
        assert subspace.rank == 2
        assert any(subspace.span_defect(Subspace(subspace.ambient, P)) <= 1e-9 for P in planes)
        etas.append(eta)
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(float(etas[i] @ G @ etas[j])) <= 1e-9


def test_geodesics_stay_on_the_product(example):
    f = frame(example, 6)
    G = example.ambient.gram
    X = np.random.default_rng(6).standard_normal(6)
    for t in (-0.3, 0.1, 0.5):
        point = geodesic(example, f, X, t)
        assert float(point @ G @ point) == pytest.approx(-1.0, abs=1e-10)
    assert np.allclose(geodesic(example, f, X, 0.0), f.position)


def test_hessian_matches_finite_differences(example):
    rng = np.random.default_rng(7)
    for _ in range(20):
        f = frame_at(example, random_params(example, rng))
        base = reference_point(example, f, 0.7)
        X = rng.standard_normal(6)
        X /= np.linalg.norm(X)
        assert hessian_check(example, f, X, base).relative_error <= 1e-4
    zero = hessian_check(example, f, np.zeros(6), base)
    assert zero.analytic == 0
    assert zero.numeric == 0


def test_hessian_rejects_coinciding_reference(example):
    f = frame(example)
    with pytest.raises(ReferencePointCoincides):
        hessian_check(example, f, np.ones(6), f.position)


def test_example_has_no_umbilical_normal(example):
    with pytest.raises(NoUmbilicalNormal):
        umbilical_normal(example, frame(example))


def test_horosphere_chart_lands_on_hyperboloid():
    rng = np.random.default_rng(0)
    imm = make_horosphere_composition(4)
    G = imm.ambient.gram
    for _ in range(100):
        x = rng.standard_normal(imm.chart_dim)
        y = horosphere_chart(x)
        assert float(y @ G @ y) == pytest.approx(-1.0, abs=1e-9 * (1.0 + float(x @ x)))
        D = horosphere_differential(x)
        assert np.abs(D.T @ G @ D - np.eye(x.size)).max() <= 1e-12
    with pytest.raises(InvalidForm):
        make_horosphere_composition(2)


def test_horosphere_span_is_degenerate_with_expected_direction(horosphere):
    pair = kaehler_pair_at(horosphere, frame(horosphere))
    analysis = span_analysis(pair)
    assert analysis.degenerate
    assert analysis.s == 2
    assert np.allclose(analysis.v, np.array([0.0, 1.0, 1.0]) / np.sqrt(2.0))


def test_horosphere_umbilical_normal_and_parallelism(horosphere):
    f = frame(horosphere, 1)
    normal = umbilical_normal(horosphere, f)
    zeta = np.zeros(horosphere.ambient.dim)
    zeta[0] = zeta[-1] = 1.0
    assert np.allclose(normal.eta, zeta - f.position, atol=1e-9)
    assert parallel_normal_check(horosphere, f.params) <= 1e-6


def test_flat_subspace_witness_on_horosphere(horosphere):
    f = frame(horosphere, 2)
    witness = flat_subspace_witness(horosphere, f, samples=200)
    assert witness.ell >= witness.bound
    assert witness.ell == 3
    assert witness.j_invariant
    assert np.abs(witness.holomorphic).max() <= 1e-10
    assert np.abs(witness.ricci).max() <= 1e-10


def test_flat_subspace_witness_needs_small_codimension(example):
    with pytest.raises(HypothesisViolated):
        flat_subspace_witness(example, frame(example))


def test_positive_holomorphic_witness_on_sphere_factors(example):
    f = frame(example, 1)
    witness = positive_holomorphic_witness(example, f, samples=200)
    assert witness.V.rank == 4
    assert witness.m == witness.codimension == 2
    assert witness.j_invariant
    assert witness.min_holomorphic >= 0.25 - 1e-9
    mixed = np.zeros(6)
    mixed[[2, 4]] = 1.0
    assert holomorphic(example, f, mixed) == pytest.approx(0.375)


def test_positive_holomorphic_witness_on_horosphere_is_too_small(horosphere):
    witness = positive_holomorphic_witness(horosphere, frame(horosphere))
    assert witness.m == 1
    assert witness.codimension == 2
    assert witness.min_holomorphic > 0


def test_hessian_pair_on_flat_directions(horosphere):
    f = frame(horosphere, 3)
    base = reference_point(horosphere, f, 0.5)
    S = np.zeros(2 * horosphere.n)
    S[flat_indices(horosphere)] = np.random.default_rng(3).standard_normal(horosphere.flat_dim)
    S /= np.linalg.norm(S)
    assert hessian_pair_check(horosphere, f, S, base).relative_error <= 1e-4


def test_moore_inclusion_on_geometric_beta(example, horosphere):
    pair = kaehler_pair_at(example, frame(example))
    X, rank = find_regular_element(pair.beta)
    assert rank == 2 * example.n
    assert moore_verify(pair.beta, X) == 0.0

    for seed in range(3):
        pair = kaehler_pair_at(horosphere, frame(horosphere, seed))
        X, _ = find_regular_element(pair.beta, seed=seed)
        assert left_map(pair.beta, X).kernel().rank >= 2
        assert moore_verify(pair.beta, X) <= 1e-9
