"""Run artifacts: diagnostics CSV, field snapshots, and the run manifest.

diagnostics.csv   header t,energy,nk,tube_defect_pre,step_rejections;
                  decimal floats with 17 significant digits, Unix newlines.
state_<i>.f64     32-byte header (magic GEOF, version, grid rank, sizes,
                  ambient dimension, all little-endian u32) followed by
                  the field as little-endian f64, row-major, grid axes
                  first then the ambient component axis.
manifest.json     written last, atomically via rename; lists every file.
"""

from __future__ import annotations

import json
import os
import struct
import time

import numpy as np

from . import pullback as pb
from . import source_geometry as sg
from . import target_geometry as tg
from .flows import TrajectoryRecord

SNAPSHOT_MAGIC = b"GEOF"
SNAPSHOT_VERSION = 1
CSV_HEADER = "t,energy,nk,tube_defect_pre,step_rejections"


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_diagnostics_csv(path: str, traj: TrajectoryRecord) -> None:
    lines = [CSV_HEADER]
    for r in traj.records:
        lines.append(",".join([
            format_float(r.t), format_float(r.energy), format_float(r.nk),
            format_float(r.tube_defect_pre), str(r.step_rejections),
        ]))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def snapshot_filename(index: int) -> str:
    return f"state_{index}.f64"


def write_snapshot(path: str, state: pb.MapState) -> None:
    m = state.metric.dim
    sizes = list(state.metric.sizes) + [0] * (2 - m)
    d = state.points.shape[-1]
    header = struct.pack("<4s7I", SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
                         m, sizes[0], sizes[1], d, 0, 0)
    assert len(header) == 32
    data = np.ascontiguousarray(state.points, dtype="<f8")
    with open(path, "wb") as f:
        f.write(header)
        f.write(data.tobytes())


def read_snapshot(path: str) -> tuple[int, tuple[int, ...], int, np.ndarray]:
    """Returns (grid rank, sizes, ambient dim, field array)."""
    with open(path, "rb") as f:
        header = f.read(32)
        if len(header) != 32:
            raise IOError(f"truncated snapshot header in {path}")
        magic, version, m, n1, n2, d, _pad1, _pad2 = struct.unpack("<4s7I", header)
        if magic != SNAPSHOT_MAGIC:
            raise IOError(f"bad snapshot magic {magic!r} in {path}")
        if version != SNAPSHOT_VERSION:
            raise IOError(f"unsupported snapshot version {version} in {path}")
        sizes = (n1,) if m == 1 else (n1, n2)
        count = int(np.prod(sizes)) * d
        data = np.frombuffer(f.read(count * 8), dtype="<f8")
        if data.size != count:
            raise IOError(f"truncated snapshot payload in {path}")
    return m, sizes, d, data.reshape(sizes + (d,)).copy()


def snapshot_to_state(path: str, target: tg.EmbeddedTarget,
                      metric: sg.SourceMetric, time_value: float = 0.0) -> pb.MapState:
    m, sizes, d, field = read_snapshot(path)
    if m != metric.dim or sizes != metric.sizes or d != target.ambient_dim:
        raise ValueError("snapshot does not match the given metric/target")
    return pb.MapState(time_value, field, target, metric)


def write_manifest(out_dir: str, payload: dict) -> str:
    path = os.path.join(out_dir, "manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)
    return path


def write_outputs(out_dir: str, traj: TrajectoryRecord, config_echo: dict,
                  extra: dict | None = None) -> dict:
    """Write all artifacts for a run; the manifest goes last."""
    from . import __version__
    os.makedirs(out_dir, exist_ok=True)
    t0 = time.time()
    files = []

    csv_path = os.path.join(out_dir, "diagnostics.csv")
    write_diagnostics_csv(csv_path, traj)
    files.append("diagnostics.csv")

    for index, state in traj.snapshots:
        name = snapshot_filename(index)
        write_snapshot(os.path.join(out_dir, name), state)
        files.append(name)

    payload = {
        "version": __version__,
        "config": config_echo,
        "files": files + ["manifest.json"],
        "n_records": len(traj.records),
        "write_seconds": round(time.time() - t0, 6),
    }
    if extra:
        payload.update(extra)
    write_manifest(out_dir, payload)
    return payload
