"""Residual reports: named residuals checked against tolerances."""

import hashlib
import json
import time
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float
    passed: bool
    seconds: float = 0.0
    note: str = ""

    def to_dict(self):
        d = {
            "name": self.name,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            "seconds": round(self.seconds, 6),
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class ResidualReport:
    title: str
    seed: int = 0
    sample_count: int = 0
    strategy: str = "ad"
    checks: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def add(self, name, residual, tol, note=""):
        residual = float(residual)
        self.checks.append(CheckResult(name, residual, tol, residual < tol, note=note))
        return self.checks[-1]

    def add_flag(self, name, passed, note=""):
        self.checks.append(CheckResult(name, 0.0 if passed else 1.0, 1.0, bool(passed), note=note))
        return self.checks[-1]

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self):
        return max((c.residual for c in self.checks), default=0.0)

    def to_dict(self):
        return {
            "title": self.title,
            "seed": self.seed,
            "sample_count": self.sample_count,
            "strategy": self.strategy,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "notes": list(self.notes),
        }

    def lines(self):
        out = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            out.append(f"{flag}  {c.name:<36} residual={c.residual:.6e}  tol={c.tol:.1e}")
        return out


ARTIFACT_VERSION = "0.1.0"


def digest_bytes(data):
    return hashlib.sha256(data).hexdigest()


def report_file_dict(command, reports, input_digest, seed, sample_count, strategy, tolerances=None):
    """Machine-readable run report; identical inputs and seed reproduce it bitwise."""
    return {
        "artifact": "poismet",
        "version": ARTIFACT_VERSION,
        "command": command,
        "input_digest": input_digest,
        "seed": seed,
        "sample_count": sample_count,
        "strategy": strategy,
        "tolerances": tolerances or {},
        "passed": all(r.passed for r in reports),
        "reports": [r.to_dict() for r in reports],
    }


def write_report(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


class timer:
    """Context manager stamping elapsed wall-clock seconds onto a CheckResult."""

    def __init__(self):
        self.seconds = 0.0

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self._t0
        return False
