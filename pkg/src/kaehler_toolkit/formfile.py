from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .bilinear import BilinearMap
from .config import DEFAULT_TOL
from .errors import FormFileError, KaehlerToolkitError
from .kaehler_forms import ComplexStructure, DiagonalizingBasis, KaehlerPair
from .pseudo_linear import QuadSpace

FIELDS = ("dim_v", "w_signature", "gram_w", "tensor", "J", "w_index")


@dataclass(frozen=True, eq=False)
class FormFile:
    dim_v: int
    w_signature: tuple[int, int]
    gram_w: np.ndarray
    tensor: np.ndarray
    J: np.ndarray | None = None
    w_index: int | None = None

    def __post_init__(self) -> None:
        try:
            gram = np.array(self.gram_w, dtype=float)
            tensor = np.array(self.tensor, dtype=float)
            J = None if self.J is None else np.array(self.J, dtype=float)
        except (TypeError, ValueError) as exc:
            raise FormFileError(f"non-numeric entries: {exc}") from exc
        n = int(self.dim_v)
        if tensor.shape != (n, n, gram.shape[0]):
            raise FormFileError(f"tensor has shape {tensor.shape}, expected ({n}, {n}, {gram.shape[0]})")
        try:
            space = QuadSpace(gram)
        except KaehlerToolkitError as exc:
            raise FormFileError(f"gram_w: {exc}") from exc
        if tuple(self.w_signature) != space.signature:
            raise FormFileError(f"w_signature {tuple(self.w_signature)} does not match gram_w {space.signature}")
        if J is not None:
            if J.shape != (n, n):
                raise FormFileError(f"J has shape {J.shape}, expected ({n}, {n})")
            try:
                ComplexStructure(J)
            except KaehlerToolkitError as exc:
                raise FormFileError(f"J: {exc}") from exc
        if self.w_index is not None and not 0 <= int(self.w_index) < gram.shape[0]:
            raise FormFileError(f"w_index {self.w_index} out of range")
        object.__setattr__(self, "dim_v", n)
        object.__setattr__(self, "w_signature", space.signature)
        object.__setattr__(self, "gram_w", gram)
        object.__setattr__(self, "tensor", tensor)
        object.__setattr__(self, "J", J)

    @classmethod
    def from_map(cls, phi: BilinearMap, J: np.ndarray | None = None, w_index: int | None = None) -> FormFile:
        return cls(phi.domain_dim, phi.target.signature, phi.target.gram, phi.tensor, J, w_index)

    @classmethod
    def from_pair(cls, pair: KaehlerPair, which: str = "alpha") -> FormFile:
        if which == "alpha":
            w_index = None if pair.w is None else int(np.argmax(np.abs(pair.w)))
            return cls.from_map(pair.alpha, pair.J.matrix, w_index)
        if which == "beta":
            return cls.from_map(pair.beta, pair.J.matrix)
        raise ValueError(f"unknown form {which!r}")

    def bilinear_map(self) -> BilinearMap:
        return BilinearMap(self.tensor, QuadSpace(self.gram_w))

    def complex_structure(self) -> ComplexStructure:
        if self.J is None:
            raise FormFileError("form file has no complex structure J")
        return ComplexStructure(self.J)

    def w_vector(self) -> np.ndarray | None:
        if self.w_index is None:
            return None
        w = np.zeros(self.gram_w.shape[0])
        w[self.w_index] = 1.0
        return w

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_v": self.dim_v,
            "w_signature": list(self.w_signature),
            "gram_w": self.gram_w.tolist(),
            "tensor": self.tensor.tolist(),
            "J": None if self.J is None else self.J.tolist(),
            "w_index": self.w_index,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> FormFile:
        if not isinstance(data, dict):
            raise FormFileError("form file must hold a JSON object")
        missing = [k for k in ("dim_v", "w_signature", "gram_w", "tensor") if k not in data]
        if missing:
            raise FormFileError(f"missing fields: {', '.join(missing)}")
        unknown = sorted(set(data) - set(FIELDS))
        if unknown:
            raise FormFileError(f"unknown fields: {', '.join(unknown)}")
        return cls(
            dim_v=data["dim_v"],
            w_signature=tuple(data["w_signature"]),
            gram_w=data["gram_w"],
            tensor=data["tensor"],
            J=data.get("J"),
            w_index=data.get("w_index"),
        )


# json writes floats with repr, the shortest string that round-trips a double.


def save_form(form: FormFile, path: str | Path) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(form.to_dict(), indent=2) + "\n")
    return out


def load_form(path: str | Path) -> FormFile:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormFileError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormFileError(f"{path} is not valid JSON: {exc}") from exc
    return FormFile.from_dict(data)


def save_basis(basis: DiagonalizingBasis, path: str | Path, tol: float = DEFAULT_TOL) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "pairs": basis.pairs.tolist(),
        "partners": basis.partners.tolist(),
        "xis": basis.xis.tolist(),
        "norms": [int(s) for s in basis.norms],
        "tol": tol,
    }
    out.write_text(json.dumps(payload, indent=2) + "\n")
    return out
