"""Run-log CSV reading against the fixed column schema."""

from __future__ import annotations

from pathlib import Path

import numpy as np

# Columns every run log carries, in file order.
RUN_LOG_COLUMNS = (
    ["t"]
    + [f"R{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    + ["bx", "by", "bz", "wx", "wy", "wz", "vx", "vy", "vz"]
    + [f"Rh{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    + ["bhx", "bhy", "bhz", "whx", "why", "whz", "vhx", "vhy", "vhz"]
    + ["err_angle", "err_pos", "err_omega", "err_nu", "n_visible", "newton_iters"]
)


class SchemaError(ValueError):
    """The CSV does not match the run-log schema; lists what is missing."""


def load_run_csv(path) -> dict[str, np.ndarray]:
    """Columns of a run log as float arrays keyed by header name.

    A header-only file yields empty arrays. Missing required columns are
    reported by name.
    """
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file, expected a run-log header")
    header = [h.strip() for h in lines[0].split(",")]
    missing = [c for c in RUN_LOG_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
    rows = [line.split(",") for line in lines[1:] if line.strip()]
    data = np.array(rows, dtype=float) if rows else np.empty((0, len(header)))
    if rows and data.shape[1] != len(header):
        raise SchemaError(f"{path}: ragged rows do not match the header")
    return {name: data[:, k] for k, name in enumerate(header)}
