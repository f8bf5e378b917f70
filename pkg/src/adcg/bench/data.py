"""CSV ingestion for the three experiment families.

All files are plain comma-separated text with a header row and dot decimal
separators (locale independent). Formats, with exact column orders:

* frames:       ``frame,c0,...,c{W-1}`` — one row per pixel row, H rows
                per frame, frames in ascending order. Pixel (ix, iy) of a
                frame is column ``c{ix}`` of its iy-th row.
* ground truth: ``frame,x_nm,y_nm,intensity`` — point sources per frame.
* ratings:      ``user,item,rating`` — integer indices, one triple per row.
* io:           ``u,y`` — one input/output sample pair per time step.

Malformed rows are rejected with their 1-based line number.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "IngestError",
    "FrameStack",
    "RatingsData",
    "IOSequence",
    "load_frames",
    "load_ratings",
    "load_io",
]


class IngestError(ValueError):
    """Malformed or inconsistent input data."""


def _read_rows(path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise IngestError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        rows = [(i + 1, row) for i, row in enumerate(reader) if row]
    if len(rows) < 2:
        raise IngestError(f"{path}: expected a header row and at least one data row")
    return rows[0][1], rows[1:]


def _floats(path, lineno, fields, expected):
    if len(fields) != expected:
        raise IngestError(f"{path}:{lineno}: expected {expected} columns, found {len(fields)}")
    try:
        return [float(f) for f in fields]
    except ValueError as exc:
        raise IngestError(f"{path}:{lineno}: {exc}") from exc


@dataclass
class FrameStack:
    """Per-frame images (flattened row-major) with optional ground truth."""

    grid_w: int
    grid_h: int
    images: list  # list of (d,) arrays
    truths: list | None = None  # list of (k, 3) arrays (x, y, intensity)

    def __len__(self):
        return len(self.images)


@dataclass
class RatingsData:
    """Train/test rating triples plus the train mean used for centering."""

    n_rows: int
    n_cols: int
    train: np.ndarray  # (k, 3) user, item, rating
    test: np.ndarray
    train_mean: float = field(init=False)

    def __post_init__(self):
        if self.train.shape[0] == 0:
            raise IngestError("empty training split")
        self.train_mean = float(np.mean(self.train[:, 2]))


@dataclass
class IOSequence:
    u: np.ndarray
    y: np.ndarray
    train_split: int

    def __post_init__(self):
        if self.u.size != self.y.size:
            raise IngestError("input and output sequences differ in length")
        if not 1 <= self.train_split < self.u.size:
            raise IngestError(
                f"train split {self.train_split} out of range for length {self.u.size}"
            )


def load_frames(path, ground_truth_path=None) -> FrameStack:
    """Load a frame stack; frame height is inferred from the frame column."""
    header, rows = _read_rows(path)
    width = len(header) - 1
    if width < 1:
        raise IngestError(f"{path}: header must contain a frame column and pixel columns")
    per_frame: dict[int, list] = {}
    for lineno, fields in rows:
        vals = _floats(path, lineno, fields, width + 1)
        fidx = int(vals[0])
        if vals[0] != fidx:
            raise IngestError(f"{path}:{lineno}: frame index must be an integer")
        per_frame.setdefault(fidx, []).append(vals[1:])
    indices = sorted(per_frame)
    if indices != list(range(len(indices))):
        raise IngestError(f"{path}: frame indices must be 0..{len(indices) - 1} without gaps")
    height = len(per_frame[indices[0]])
    images = []
    for fidx in indices:
        rows_f = per_frame[fidx]
        if len(rows_f) != height:
            raise IngestError(f"{path}: frame {fidx} has {len(rows_f)} rows, expected {height}")
        images.append(np.asarray(rows_f, dtype=float).ravel())

    truths = None
    if ground_truth_path is not None:
        _, trows = _read_rows(ground_truth_path)
        truths = [[] for _ in indices]
        for lineno, fields in trows:
            vals = _floats(ground_truth_path, lineno, fields, 4)
            fidx = int(vals[0])
            if not 0 <= fidx < len(indices):
                raise IngestError(f"{ground_truth_path}:{lineno}: frame index {fidx} out of range")
            truths[fidx].append(vals[1:])
        truths = [np.asarray(t, dtype=float).reshape(-1, 3) for t in truths]
    return FrameStack(grid_w=width, grid_h=height, images=images, truths=truths)


def _load_triples(path, shape):
    n_rows, n_cols = shape
    _, rows = _read_rows(path)
    seen = set()
    out = np.empty((len(rows), 3))
    for k, (lineno, fields) in enumerate(rows):
        vals = _floats(path, lineno, fields, 3)
        i, j = int(vals[0]), int(vals[1])
        if vals[0] != i or vals[1] != j:
            raise IngestError(f"{path}:{lineno}: user/item indices must be integers")
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise IngestError(f"{path}:{lineno}: index ({i}, {j}) outside shape {shape}")
        if (i, j) in seen:
            raise IngestError(f"{path}:{lineno}: duplicate entry ({i}, {j})")
        seen.add((i, j))
        out[k] = (i, j, vals[2])
    return out


def load_ratings(path, shape, test_path=None) -> RatingsData:
    """Load rating triples; ``path`` is the training split."""
    train = _load_triples(path, shape)
    test = _load_triples(test_path, shape) if test_path is not None else np.zeros((0, 3))
    return RatingsData(n_rows=shape[0], n_cols=shape[1], train=train, test=test)


def load_io(path, train_split=None) -> IOSequence:
    """Load an input/output sequence; default split is the first half."""
    _, rows = _read_rows(path)
    u = np.empty(len(rows))
    y = np.empty(len(rows))
    for k, (lineno, fields) in enumerate(rows):
        u[k], y[k] = _floats(path, lineno, fields, 2)
    if train_split is None:
        train_split = len(rows) // 2
    return IOSequence(u=u, y=y, train_split=int(train_split))
