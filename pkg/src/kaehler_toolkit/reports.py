from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd


@dataclass
class Check:
    name: str
    max_residual: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)


def _severity(residual: float, tolerance: float) -> tuple[float, float]:
    if np.isnan(residual):
        return (np.inf, np.inf)
    if tolerance > 0:
        return (residual / tolerance, residual)
    return (np.inf if residual > 0 else 0.0, residual)


@dataclass
class Report:
    suite: str
    seed: int
    checks: list[Check] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)
    runtime_ms: int = 0

    def add(self, name: str, residual: float, tolerance: float, detail: str = "") -> Check:
        """Record a residual; repeated names keep the entry with the worst
        residual-to-tolerance ratio, together with its own tolerance."""
        residual, tolerance = float(residual), float(tolerance)
        for check in self.checks:
            if check.name == name:
                if _severity(residual, tolerance) > _severity(check.max_residual, check.tolerance):
                    check.max_residual, check.tolerance = residual, tolerance
                    check.detail = detail or check.detail
                return check
        check = Check(name, residual, tolerance, detail)
        self.checks.append(check)
        return check

    def require(self, name: str, condition: bool, detail: str = "") -> Check:
        return self.add(name, 0.0 if condition else 1.0, 0.0, detail)

    def at_least(self, name: str, value: float, bound: float) -> Check:
        return self.add(name, max(0.0, bound - value), 0.0, f"value {value}, bound {bound}")

    def at_most(self, name: str, values, tolerance: float) -> Check:
        """Signed values that must not exceed the tolerance (K ≤ 0 style checks)."""
        values = np.asarray(values, dtype=float)
        worst = float(values.max()) if values.size else 0.0
        return self.add(name, max(worst, 0.0), tolerance)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "suite": self.suite,
                    "check": c.name,
                    "max_residual": c.max_residual,
                    "tolerance": c.tolerance,
                    "pass": c.passed,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
            columns=["suite", "check", "max_residual", "tolerance", "pass", "detail"],
        )

    def summary(self) -> dict[str, object]:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "num_checks": len(self.checks),
            "num_failed": len(self.failures()),
            "passed": self.passed,
            "runtime_ms": self.runtime_ms,
        }

    def render(self) -> str:
        lines = [f"{self.suite}: {'PASS' if self.passed else 'FAIL'} (seed {self.seed}, {self.runtime_ms} ms)"]
        for c in self.checks:
            status = "ok  " if c.passed else "FAIL"
            lines.append(f"  {status} {c.name}: {c.max_residual:.3e} (tol {c.tolerance:.1e})")
        for key, value in self.values.items():
            lines.append(f"  {key} = {_plain(value)!r}")
        return "\n".join(lines)


def _plain(value):
    return value.item() if isinstance(value, np.generic) else value


def export_report(report: Report, output_dir: str | Path) -> dict[str, Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    paths: dict[str, Path] = {}

    checks_path = out / f"{report.suite}_checks.csv"
    report.to_frame().to_csv(checks_path, index=False)
    paths["checks"] = checks_path

    summary_path = out / f"{report.suite}_summary.csv"
    pd.DataFrame([report.summary()]).to_csv(summary_path, index=False)
    paths["summary"] = summary_path

    if report.values:
        values_path = out / f"{report.suite}_values.csv"
        pd.DataFrame(sorted(report.values.items()), columns=["name", "value"]).to_csv(values_path, index=False)
        paths["values"] = values_path

    return paths
