import numpy as np
import pytest

from ppnmm_unmix.core import HyperCube, SpectralLibrary
from ppnmm_unmix.formats import (
    read_cube,
    read_labels_csv,
    read_library,
    read_matrix_csv,
    write_cube,
    write_labels_csv,
    write_labels_pgm,
    write_library,
    write_matrix_csv,
)


def test_library_round_trip(tmp_path, rng):
    lib = SpectralLibrary(rng.random((7, 3)), ["a", "b", "c"])
    write_library(tmp_path / "lib.csv", lib)
    back = read_library(tmp_path / "lib.csv")
    np.testing.assert_array_equal(back.values, lib.values)
    assert back.names == ["a", "b", "c"]


def test_library_without_header(tmp_path):
    (tmp_path / "lib.csv").write_text("0.1,0.2\n0.3,0.4\n0.5,0.6\n")
    lib = read_library(tmp_path / "lib.csv")
    assert lib.values.shape == (3, 2) and lib.names == ["em1", "em2"]


def test_library_errors(tmp_path):
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ValueError):
        read_library(tmp_path / "empty.csv")
    (tmp_path / "bad.csv").write_text("a,b\n0.1,x\n0.2,0.3\n")
    with pytest.raises(ValueError):
        read_library(tmp_path / "bad.csv")


def test_cube_layout(tmp_path):
    data = np.arange(2 * 3 * 4, dtype=np.float64).reshape(6, 4)
    write_cube(tmp_path / "c", HyperCube(3, 2, data))
    raw = (tmp_path / "c.bin").read_bytes()
    # pixel-major little-endian float64: all bands of pixel 0 first
    np.testing.assert_array_equal(np.frombuffer(raw, "<f8"), data.ravel())
    meta = (tmp_path / "c.json").read_text()
    assert '"layout": "pixel-major"' in meta and '"dtype": "f64le"' in meta
    back = read_cube(tmp_path / "c.json")
    assert (back.width, back.height, back.bands) == (3, 2, 4)
    np.testing.assert_array_equal(back.data, data)


def test_cube_size_mismatch(tmp_path):
    write_cube(tmp_path / "c", HyperCube(2, 1, np.zeros((2, 3))))
    (tmp_path / "c.bin").write_bytes(b"\0" * 8)
    with pytest.raises(ValueError):
        read_cube(tmp_path / "c")


def test_labels_one_based(tmp_path):
    labels = np.array([[0, 1, 2], [2, 1, 0]])
    write_labels_csv(tmp_path / "l.csv", labels)
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "1,2,3"
    np.testing.assert_array_equal(read_labels_csv(tmp_path / "l.csv"), labels)
    (tmp_path / "z.csv").write_text("0,1\n")
    with pytest.raises(ValueError):
        read_labels_csv(tmp_path / "z.csv")


def test_pgm(tmp_path):
    write_labels_pgm(tmp_path / "l.pgm", np.array([[0, 1], [2, 0]]), 3)
    raw = (tmp_path / "l.pgm").read_bytes()
    assert raw.startswith(b"P5\n2 2\n255\n")
    assert list(raw[-4:]) == [0, 127, 254, 0]


def test_matrix_round_trip(tmp_path, rng):
    m = rng.random((4, 3))
    write_matrix_csv(tmp_path / "m.csv", m, header=["x", "y", "z"])
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "m.csv"), m)
    write_matrix_csv(tmp_path / "n.csv", m)
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "n.csv"), m)
