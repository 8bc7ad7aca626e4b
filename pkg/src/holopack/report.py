"""Deterministic CSV, JSON and SVG writers and the run manifest."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from fractions import Fraction
from pathlib import Path

import numpy as np


def _plain(value):
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def csv_text(header, rows) -> str:
    """RFC 4180 style CSV with LF endings; floats use ``repr`` for exact round-trip."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else _plain(v) for v in row])
    return buf.getvalue()


def json_text(doc) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def svg_loglog(x, y, xlabel: str, ylabel: str, title: str = "") -> str:
    """Static log-log line plot as SVG text, byte-stable across runs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "holopack", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.loglog(x, y, marker="o")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", lw=0.3)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


class OutputSet:
    """Collects named outputs and writes them with a manifest."""

    def __init__(self):
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str):
        self.files[name] = text

    def write(self, out_dir: Path, manifest: dict) -> dict:
        out_dir.mkdir(parents=True, exist_ok=True)
        sums = {}
        for name, text in self.files.items():
            data = text.encode("utf-8")
            (out_dir / name).write_bytes(data)
            sums[name] = hashlib.sha256(data).hexdigest()
        manifest = dict(manifest, checksums=sums)
        (out_dir / "manifest.json").write_text(json_text(manifest), encoding="utf-8")
        return manifest
