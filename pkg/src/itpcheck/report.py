"""Deterministic text, JSON and CSV rendering of check results.

Every number goes through :func:`fmt` (12 significant digits), so identical
inputs give byte-identical output.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

DIGITS = 12


def fmt(x) -> str:
    """12-significant-digit rendering of reals, complex numbers and flags."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        if z.imag == 0:
            return fmt(z.real)
        sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
        return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}i"
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if v == 0:
            return "0"  # drop the sign of -0.0
        return f"{v:.{DIGITS}g}"
    return str(x)


def jsonable(x):
    """Plain JSON data with every float rounded to 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        z = complex(x)
        return {"re": jsonable(z.real), "im": jsonable(z.imag)}
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if not math.isfinite(v):
            return str(v)
        return 0.0 if v == 0 else float(f"{v:.{DIGITS}g}")
    return x


@dataclass
class Report:
    command: str
    passed: bool
    summary: dict
    spec: dict | None = None
    config_hash: str = ""
    witnesses: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    timing: dict | None = None
    version: str = __version__

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "version": self.version,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "summary": self.summary,
            "witnesses": self.witnesses,
            "artifacts": self.artifacts,
            "spec": self.spec,
        }
        if self.timing is not None:
            out["timing_s"] = self.timing
        return jsonable(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"itpcheck {self.version}  {self.command}"]
        if self.config_hash:
            lines.append(f"config_hash: {self.config_hash}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        lines += _text_block("summary", self.summary)
        if self.witnesses:
            lines += _text_block("witnesses", self.witnesses)
        if self.artifacts:
            lines.append("artifacts:")
            lines += [f"  {a}" for a in self.artifacts]
        if self.timing is not None:
            lines += _text_block("timing_s", self.timing)
        if self.spec is not None:
            lines.append("spec:")
            lines += ["  " + s for s in json.dumps(jsonable(self.spec), sort_keys=True, indent=2).splitlines()]
        return "\n".join(lines) + "\n"


def _fmt_seq(value) -> str:
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt_seq(v) for v in value) + "]"
    return fmt(value)


def _text_block(title: str, data: dict, indent: int = 2) -> list[str]:
    lines = [f"{' ' * (indent - 2)}{title}:"]
    for key in data:
        value = data[key]
        pad = " " * indent
        if isinstance(value, dict):
            lines += _text_block(f"{key}", value, indent + 2)
        elif isinstance(value, (list, tuple, np.ndarray)):
            lines.append(f"{pad}{key}: {_fmt_seq(value)}")
        else:
            lines.append(f"{pad}{key}: {fmt(value)}")
    return lines


def write_csv(path, header: list[str], rows, config_hash: str) -> Path:
    """CSV with a provenance comment line and a header whose names carry units."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# itpcheck {__version__} config_hash={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path
