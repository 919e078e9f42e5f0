"""Loading and plotting of solver run directories.

A study bundle wraps one or more output directories.  Every directory
must contain a manifest.json whose file list matches the directory
contents; diagnostics and report tables are parsed into numpy arrays.
Plots annotate least-squares slopes on log-log refinement data."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

DIAGNOSTICS_HEADER = ["t", "energy", "nk", "tube_defect_pre", "step_rejections"]
CONVERGENCE_PREFIX = "convergence_"


class BundleError(ValueError):
    pass


def _read_csv(path: str) -> dict[str, np.ndarray]:
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows:
        raise BundleError(f"empty table {path}")
    header, data = rows[0], rows[1:]
    cols = {name: np.array([float(r[i]) for r in data])
            for i, name in enumerate(header)}
    return cols


@dataclass
class RunDirectory:
    path: str
    manifest: dict
    diagnostics: dict[str, np.ndarray] | None
    tables: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)


@dataclass
class StudyBundle:
    runs: list[RunDirectory]

    @classmethod
    def load(cls, *directories: str) -> "StudyBundle":
        runs = []
        for d in directories:
            mpath = os.path.join(d, "manifest.json")
            if not os.path.exists(mpath):
                raise BundleError(f"missing manifest in {d}")
            with open(mpath, encoding="utf-8") as f:
                manifest = json.load(f)
            for name in manifest.get("files", []):
                if not os.path.exists(os.path.join(d, name)):
                    raise BundleError(f"manifest of {d} lists missing file {name}")
            diagnostics = None
            dpath = os.path.join(d, "diagnostics.csv")
            if os.path.exists(dpath):
                diagnostics = _read_csv(dpath)
                if list(diagnostics) != DIAGNOSTICS_HEADER:
                    raise BundleError(f"unexpected diagnostics header in {d}")
            tables = {}
            for name in sorted(os.listdir(d)):
                if name.endswith(".csv") and name != "diagnostics.csv":
                    tables[name] = _read_csv(os.path.join(d, name))
            runs.append(RunDirectory(d, manifest, diagnostics, tables))
        return cls(runs)

    def convergence_tables(self) -> dict[str, dict[str, np.ndarray]]:
        found = {}
        for run in self.runs:
            for name, table in run.tables.items():
                if name.startswith(CONVERGENCE_PREFIX):
                    found[name] = table
        return found


def fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _plot_energy(run: RunDirectory, out_dir: str) -> str | None:
    if run.diagnostics is None:
        return None
    t, E = run.diagnostics["t"], run.diagnostics["energy"]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot(t, E, "-", lw=1)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    drift = abs(E[-1] - E[0]) / max(abs(E[0]), 1e-300)
    ax.set_title(f"energy vs time (relative drift {drift:.2e})", fontsize=9)
    name = f"energy_{os.path.basename(os.path.normpath(run.path))}.png"
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, name), dpi=120)
    plt.close(fig)
    return name


def _plot_convergence(name: str, table: dict[str, np.ndarray], out_dir: str) -> tuple[str, float, float]:
    x, err = table["x"], table["error"]
    expected = float(table["expected_order"][0])
    slope = fit_slope(x, err)
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.loglog(x, err, "o-", lw=1)
    ref = err[0] * (x / x[0]) ** expected
    ax.loglog(x, ref, "--", lw=0.8, color="gray")
    ax.set_xlabel("step / spacing")
    ax.set_ylabel("residual")
    ax.set_title(f"{name}: fitted slope {slope:.2f} (expected {expected:g})",
                 fontsize=8)
    img = name.replace(".csv", ".png")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, img), dpi=120)
    plt.close(fig)
    return img, slope, expected


def _plot_continuation(table: dict[str, np.ndarray], out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.loglog(table["epsilon"], table["gap"], "s-")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("final-time gap to the dispersive run")
    ax.set_title("continuation study", fontsize=9)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "continuation.png"), dpi=120)
    plt.close(fig)
    return "continuation.png"


def _plot_gauge(table: dict[str, np.ndarray], out_dir: str) -> str:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    ax.loglog(table["n"], table["p1_growth"], "^-", label="raw first-order term")
    ax.loglog(table["n"], table["r"], "o-", label="gauged commutator")
    ax.set_xlabel("mode n")
    ax.legend(fontsize=7)
    ax.set_title("gauge elimination", fontsize=9)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "gauge_elimination.png"), dpi=120)
    plt.close(fig)
    return "gauge_elimination.png"


def plot_studies(bundle: StudyBundle, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    images = []
    for run in bundle.runs:
        img = _plot_energy(run, out_dir)
        if img:
            images.append(img)
        for name, table in run.tables.items():
            if name.startswith(CONVERGENCE_PREFIX):
                images.append(_plot_convergence(name, table, out_dir)[0])
            elif name == "continuation.csv":
                images.append(_plot_continuation(table, out_dir))
            elif name == "gauge_elimination.csv":
                images.append(_plot_gauge(table, out_dir))
    return images


def study_summary(bundle: StudyBundle, out_dir: str) -> dict:
    """Fitted slopes and drift figures, written to study_summary.json."""
    os.makedirs(out_dir, exist_ok=True)
    summary: dict = {"runs": [r.path for r in bundle.runs], "convergence": {}}
    for name, table in bundle.convergence_tables().items():
        slope = fit_slope(table["x"], table["error"])
        expected = float(table["expected_order"][0])
        summary["convergence"][name] = {
            "fitted_slope": slope,
            "expected_order": expected,
            "within_tolerance": bool(abs(slope - expected) <= 0.2),
        }
    for run in bundle.runs:
        if run.diagnostics is not None and len(run.diagnostics["t"]) > 1:
            E = run.diagnostics["energy"]
            summary.setdefault("energy_drift", {})[run.path] = (
                abs(E[-1] - E[0]) / max(abs(E[0]), 1e-300))
    path = os.path.join(out_dir, "study_summary.json")
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return summary
