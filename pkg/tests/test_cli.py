import numpy as np
import pytest

from kaehler_toolkit.bilinear import BilinearMap
from kaehler_toolkit.cli import main, parse_args
from kaehler_toolkit.errors import INPUT_ERRORS, DegenerateSpan, InvalidForm, RecursionFailed
from kaehler_toolkit.formfile import FormFile, save_form
from kaehler_toolkit.pseudo_linear import QuadSpace


def test_parse_args_defaults():
    args = parse_args(["example-suite"])
    assert args.radii == [2.0, 1.0, 2.0**0.5]
    assert args.points == 10
    assert args.tol == 1e-9
    assert parse_args(["random-suite", "--dims", "2,4"]).dims == (2, 4)
    with pytest.raises(SystemExit):
        parse_args(["random-suite", "--trials", "0"])


def test_random_suite_exit_codes(capsys):
    assert main(["random-suite", "--trials", "3"]) == 0
    assert "random: PASS" in capsys.readouterr().out
    assert main(["random-suite", "--trials", "3", "--corrupt"]) == 1
    assert "random: FAIL" in capsys.readouterr().out


def test_bad_radii_is_an_input_error(capsys):
    assert main(["example-suite", "--radii", "1,1,1", "--points", "1"]) == 2
    assert "CurvatureConstraintViolated" in capsys.readouterr().err


def test_check_flat_on_stored_forms(tmp_path, capsys):
    zero = save_form(FormFile.from_map(BilinearMap.zero(2, QuadSpace.euclidean(1))), tmp_path / "zero.json")
    inner = save_form(
        FormFile.from_map(BilinearMap(np.eye(2)[..., None], QuadSpace.euclidean(1))), tmp_path / "inner.json"
    )
    assert main(["check-flat", str(zero), "--out", str(tmp_path / "reports")]) == 0
    assert (tmp_path / "reports" / "check-flat_checks.csv").exists()
    assert main(["check-flat", str(inner)]) == 1

    bad = tmp_path / "bad.json"
    bad.write_text("[")
    assert main(["check-flat", str(bad)]) == 2
    assert "FormFileError" in capsys.readouterr().err


def test_diagonalize_exported_example(tmp_path, capsys):
    out = tmp_path / "example"
    assert main(["example-suite", "--points", "1", "--out", str(out)]) == 0
    diag = tmp_path / "diag"
    assert main(["diagonalize", str(out / "alpha.json"), "--out", str(diag)]) == 0
    first = (diag / "basis.json").read_text()
    assert main(["diagonalize", str(out / "alpha.json"), "--out", str(diag)]) == 0
    assert (diag / "basis.json").read_text() == first


def test_diagonalize_degenerate_span_fails(tmp_path, capsys):
    out = tmp_path / "horosphere"
    assert main(["horosphere-suite", "--points", "1", "--out", str(out)]) == 0
    capsys.readouterr()
    assert main(["diagonalize", str(out / "alpha.json")]) == 1
    assert "DegenerateSpan" in capsys.readouterr().out


def test_algorithm_failures_are_not_input_errors():
    assert not issubclass(RecursionFailed, INPUT_ERRORS)
    assert not issubclass(DegenerateSpan, INPUT_ERRORS)
    assert issubclass(InvalidForm, INPUT_ERRORS)
