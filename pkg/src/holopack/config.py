"""Experiment configuration files (TOML).

A config names a command and carries its parameters in tables. Parsing is
strict: unknown tables or keys are rejected, so a typo never silently falls
back to a default. Only keys present in the file are stored, which makes
``dumps(loads(text))`` reproduce the document up to formatting.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import tomli
import tomli_w

from .errors import ConfigError

COMMANDS = ("density", "theta-table", "gap", "chain", "nevanlinna", "tiling", "acceptance")

# allowed keys of the [params] table per command, with defaults
PARAMS = {
    "density": {"r0": 1.0, "k_max": 7, "radii": None, "window": 3, "norm": "fubini_study",
                "annulus_width": 1.0, "radial_order": 8, "angular_density": 8.0, "matrix": None},
    "theta-table": {"tau": [0.0, 1.0], "l": [2, 3, 4], "resolution": 64, "route": "dual", "tol": 1e-14},
    "gap": {"resolution": 64},
    "chain": {"epsilon": "1e-100", "r0": "1e-10", "delta": "1e-5", "error_cap": "1e-20",
              "sector_gap": "1e-30", "vol_ratio": "1/16", "stop_on_failure": False},
    "nevanlinna": {"radii": [1.0, 2.0, 5.0, 10.0, 20.0, 50.0], "route": "energy"},
    "tiling": {"R": 10.0, "side": 1.0, "quad_order": 16, "norm": "fubini_study"},
    "acceptance": {"criteria": list(range(1, 11))},
}
# which document tables each command takes besides [params]
TABLES = {
    "density": {"curve"}, "theta-table": set(), "gap": {"curves"}, "chain": set(),
    "nevanlinna": {"function"}, "tiling": {"curve"}, "acceptance": set(),
}
REQUIRED = {"density": {"curve"}, "gap": {"curves"}, "nevanlinna": {"function"}, "tiling": {"curve"}}
TOP_LEVEL = {"command", "params", "output", "curve", "curves", "function"}
OUTPUT_KEYS = {"dir", "svg"}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)
    curve: dict | None = None
    curves: list | None = None
    function: dict | None = None
    output: dict = field(default_factory=dict)

    def param(self, key: str):
        return self.params.get(key, PARAMS[self.command][key])

    def to_dict(self) -> dict:
        doc = {"command": self.command}
        for key in ("params", "output"):
            if getattr(self, key):
                doc[key] = getattr(self, key)
        for key in ("curve", "curves", "function"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        return doc

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def digest(self) -> str:
        """SHA-256 of the canonical serialization."""
        return hashlib.sha256(self.dumps().encode()).hexdigest()


def _position(text: str, err: tomli.TOMLDecodeError) -> tuple[int | None, int | None]:
    # tomli appends "(at line L, column C)" to its messages
    msg = str(err)
    if "line " in msg and "column " in msg:
        try:
            tail = msg.rsplit("(at line ", 1)[1]
            line, col = tail.rstrip(")").split(", column ")
            return int(line), int(col)
        except (IndexError, ValueError):
            pass
    return None, None


def _key_line(text: str, key: str) -> int | None:
    for i, raw in enumerate(text.splitlines(), 1):
        s = raw.strip()
        if s.startswith(key) and s[len(key):].lstrip().startswith("=") or s in (f"[{key}]", f"[[{key}]]"):
            return i
    return None


def loads(text: str) -> ExperimentConfig:
    """Parse and validate a config document; raises ``ConfigError`` with a position."""
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as err:
        line, col = _position(text, err)
        raise ConfigError(str(err).split(" (at line")[0], line, col) from None

    def fail(msg, key=None):
        raise ConfigError(msg, _key_line(text, key) if key else None, 1 if key else None)

    extra = set(doc) - TOP_LEVEL
    if extra:
        k = sorted(extra)[0]
        fail(f"unknown top-level key {k!r}", k)
    cmd = doc.get("command")
    if cmd not in COMMANDS:
        fail(f"'command' must be one of {', '.join(COMMANDS)}; got {cmd!r}", "command")
    for key in ("curve", "curves", "function"):
        if key in doc and key not in TABLES[cmd]:
            fail(f"command {cmd!r} takes no {key!r} table", key)
    for key in REQUIRED.get(cmd, ()):
        if key not in doc:
            fail(f"command {cmd!r} needs a {key!r} table")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        fail("'params' must be a table", "params")
    for k in params:
        if k not in PARAMS[cmd]:
            fail(f"unknown parameter {k!r} for command {cmd!r}", k)
    output = doc.get("output", {})
    if not isinstance(output, dict):
        fail("'output' must be a table", "output")
    for k in output:
        if k not in OUTPUT_KEYS:
            fail(f"unknown output key {k!r}", k)
    curves = doc.get("curves")
    if curves is not None and not (isinstance(curves, list) and all(isinstance(c, dict) for c in curves)):
        fail("'curves' must be an array of tables", "curves")
    return ExperimentConfig(cmd, params, doc.get("curve"), curves, doc.get("function"), output)


def load(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as err:
        raise ConfigError(f"config is not UTF-8: {err}") from None
    return loads(text)
