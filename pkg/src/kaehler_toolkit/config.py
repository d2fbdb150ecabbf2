from __future__ import annotations

from dataclasses import dataclass

DEFAULT_TOL = 1e-9
DEFAULT_SAMPLES = 64
DEFAULT_STEP = 1e-4
CURVATURE_SAMPLES = 1000
HYPOTHESIS_SAMPLES = 200


@dataclass
class SuiteConfig:
    tol: float = DEFAULT_TOL
    seed: int = 0
    points: int = 10
    trials: int = 100
    curvature_samples: int = CURVATURE_SAMPLES
    hessian_points: int = 20
    # Finite-difference step for Hessian and normal-connection checks
    step: float = DEFAULT_STEP
    hessian_tol: float = 1e-4
    parallel_tol: float = 1e-6
