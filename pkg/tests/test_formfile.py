import json

import numpy as np
import pytest

from kaehler_toolkit.errors import FormFileError
from kaehler_toolkit.formfile import FormFile, load_form, save_basis, save_form
from kaehler_toolkit.geometry import frame_at, kaehler_pair_at, make_example1, random_params
from kaehler_toolkit.kaehler_forms import ComplexStructure, diagonalize


@pytest.fixture()
def example_pair():
    imm = make_example1([2.0, 1.0, np.sqrt(2.0)])
    frame = frame_at(imm, random_params(imm, np.random.default_rng(0)))
    return kaehler_pair_at(imm, frame)


def test_saved_form_reloads_bit_for_bit(example_pair, tmp_path):
    form = FormFile.from_pair(example_pair, "alpha")
    path = save_form(form, tmp_path / "alpha.json")
    loaded = load_form(path)

    assert loaded.dim_v == 6
    assert loaded.w_signature == (2, 1)
    assert loaded.w_index == 2
    assert np.array_equal(loaded.tensor, example_pair.alpha.tensor)
    assert np.array_equal(loaded.J, ComplexStructure.standard(3).matrix)
    assert np.array_equal(loaded.w_vector(), [0.0, 0.0, 1.0])


def test_beta_export_has_doubled_target(example_pair, tmp_path):
    form = FormFile.from_pair(example_pair, "beta")
    assert form.w_index is None
    assert form.w_signature == (3, 3)
    data = json.loads(save_form(form, tmp_path / "beta.json").read_text())
    assert sorted(data) == ["J", "dim_v", "gram_w", "tensor", "w_index", "w_signature"]


def test_missing_and_unknown_fields_are_rejected():
    data = FormFile(2, (1, 0), [[1.0]], np.zeros((2, 2, 1))).to_dict()
    with pytest.raises(FormFileError):
        FormFile.from_dict({k: v for k, v in data.items() if k != "tensor"})
    with pytest.raises(FormFileError):
        FormFile.from_dict({**data, "extra": 1})
    with pytest.raises(FormFileError):
        FormFile.from_dict([1, 2, 3])


def test_inconsistent_fields_are_rejected():
    with pytest.raises(FormFileError):
        FormFile(2, (1, 0), [[1.0]], np.zeros((3, 3, 1)))
    with pytest.raises(FormFileError):
        FormFile(2, (0, 1), [[1.0]], np.zeros((2, 2, 1)))
    with pytest.raises(FormFileError):
        FormFile(2, (1, 0), [[0.0]], np.zeros((2, 2, 1)))
    with pytest.raises(FormFileError):
        FormFile(2, (1, 0), [[1.0]], np.zeros((2, 2, 1)), J=np.eye(2))
    with pytest.raises(FormFileError):
        FormFile(2, (1, 0), [[1.0]], np.zeros((2, 2, 1)), w_index=3)


def test_missing_complex_structure_is_reported():
    form = FormFile(2, (1, 0), [[1.0]], np.zeros((2, 2, 1)))
    assert form.w_vector() is None
    with pytest.raises(FormFileError):
        form.complex_structure()


def test_unreadable_files_raise_form_file_error(tmp_path):
    with pytest.raises(FormFileError):
        load_form(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(FormFileError):
        load_form(bad)


def test_basis_file_contents(example_pair, tmp_path):
    basis = diagonalize(example_pair)
    data = json.loads(save_basis(basis, tmp_path / "basis.json").read_text())
    assert data["norms"][0] == -1
    assert len(data["pairs"]) == 3
    assert data["tol"] == 1e-9
