"""
Reading and writing of libraries, cubes, label maps and plain matrices.

File layouts:

* library CSV: one row per band, one column per endmember, optional header
  row of endmember names.
* cube: ``<stem>.json`` sidecar plus ``<stem>.bin`` holding P*L little-endian
  float64 values, all bands of pixel 0 first.
* label map CSV: ``height`` rows of ``width`` integers in 1..K.
* label map PGM: binary 8-bit greymap, labels spread over 0..255.
"""
import csv
import json
from pathlib import Path

import numpy as np

from .core import HyperCube, SpectralLibrary

FLOAT_FMT = "%.17g"


def _is_number(s):
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_library(path):
    """Load a bands x endmembers CSV, with or without a header row of names."""
    with open(path, newline="") as f:
        rows = [row for row in csv.reader(f) if row and any(c.strip() for c in row)]
    if not rows:
        raise ValueError(f"{path}: empty library file")
    names = []
    if not all(_is_number(c) for c in rows[0]):
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    try:
        values = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric library entry ({exc})") from None
    return SpectralLibrary(values, names)


def write_library(path, lib):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(lib.names)
        for row in lib.values:
            w.writerow([FLOAT_FMT % v for v in row])


def _cube_paths(path):
    path = Path(path)
    stem = path.with_suffix("") if path.suffix in (".json", ".bin") else path
    return stem.with_suffix(".json"), stem.with_suffix(".bin")


def write_cube(path, cube):
    """Write ``<stem>.json`` and ``<stem>.bin``; ``path`` may carry either suffix or none."""
    meta_path, bin_path = _cube_paths(path)
    meta = {
        "width": cube.width,
        "height": cube.height,
        "bands": cube.bands,
        "dtype": "f64le",
        "layout": "pixel-major",
    }
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    cube.data.astype("<f8").tofile(bin_path)
    return meta_path, bin_path


def read_cube(path):
    meta_path, bin_path = _cube_paths(path)
    meta = json.loads(meta_path.read_text())
    if meta.get("dtype", "f64le") != "f64le" or meta.get("layout", "pixel-major") != "pixel-major":
        raise ValueError(f"{meta_path}: unsupported dtype/layout {meta.get('dtype')}/{meta.get('layout')}")
    W, H, L = int(meta["width"]), int(meta["height"]), int(meta["bands"])
    data = np.fromfile(bin_path, dtype="<f8")
    if data.size != W * H * L:
        raise ValueError(f"{bin_path}: expected {W * H * L} values, found {data.size}")
    return HyperCube(W, H, data.reshape(W * H, L).astype(np.float64))


def write_labels_csv(path, labels):
    """Write a (height, width) map of 0-based labels as 1-based integers."""
    labels = np.asarray(labels)
    np.savetxt(path, labels + 1, fmt="%d", delimiter=",")


def read_labels_csv(path):
    """Inverse of :func:`write_labels_csv`; returns 0-based labels of shape (height, width)."""
    labels = np.loadtxt(path, delimiter=",", dtype=np.int64, ndmin=2)
    if labels.min() < 1:
        raise ValueError(f"{path}: labels must be 1-based")
    return labels - 1


def write_labels_pgm(path, labels, n_classes):
    labels = np.asarray(labels)
    H, W = labels.shape
    scale = 255 // max(n_classes - 1, 1)
    grey = (labels * scale).clip(0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(f"P5\n{W} {H}\n255\n".encode("ascii"))
        f.write(grey.tobytes())


def write_matrix_csv(path, matrix, header=None):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=np.float64))
    kw = {"header": ",".join(header), "comments": ""} if header else {}
    np.savetxt(path, matrix, fmt=FLOAT_FMT, delimiter=",", **kw)


def read_matrix_csv(path):
    with open(path) as f:
        first = f.readline()
    skip = 0 if all(_is_number(c) for c in first.strip().split(",")) else 1
    return np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
