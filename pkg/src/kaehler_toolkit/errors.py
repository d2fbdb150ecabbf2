"""Exception hierarchy. Everything is a ValueError so callers that only know
about bad input keep working."""

from __future__ import annotations


class KaehlerToolkitError(ValueError):
    pass


class DimensionMismatch(KaehlerToolkitError):
    pass


class InvalidForm(KaehlerToolkitError):
    pass


class DecompositionFailed(KaehlerToolkitError):
    pass


class NoNullVector(KaehlerToolkitError):
    pass


class NotFlat(KaehlerToolkitError):
    pass


class ShapeIdViolation(KaehlerToolkitError):
    pass


class NotDegenerate(KaehlerToolkitError):
    pass


class PlaneNotLorentzian(KaehlerToolkitError):
    pass


class HypothesisViolated(KaehlerToolkitError):
    pass


class SearchFailed(KaehlerToolkitError):
    pass


class RecursionFailed(KaehlerToolkitError):
    pass


class BadCorank(KaehlerToolkitError):
    pass


class DegenerateSpan(KaehlerToolkitError):
    pass


class CurvatureConstraintViolated(KaehlerToolkitError):
    pass


class ChartDomainError(KaehlerToolkitError):
    pass


class NotFlatNormalBundle(KaehlerToolkitError):
    pass


class ReferencePointCoincides(KaehlerToolkitError):
    pass


class NoUmbilicalNormal(KaehlerToolkitError):
    pass


class FormFileError(KaehlerToolkitError):
    pass


# Raised on malformed input rather than on a failed mathematical check.
INPUT_ERRORS = (
    FormFileError,
    CurvatureConstraintViolated,
    ChartDomainError,
    DimensionMismatch,
    InvalidForm,
)
