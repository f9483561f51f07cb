import numpy as np
import pytest

from ssop.containers import MAGIC, read_matrix, sidecar_path, write_matrix
from ssop.util import SchemaError, parse_extended_float


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    m = rng.standard_normal((7, 5)) + 1j * rng.standard_normal((7, 5))
    path = tmp_path / "m.ssopmat"
    write_matrix(path, m, meta={"dt": 0.8, "n_omega": 5})
    back, meta = read_matrix(path, with_meta=True)
    np.testing.assert_array_equal(back, m)
    assert meta == {"dt": 0.8, "n_omega": 5}


def test_header_layout(tmp_path):
    path = tmp_path / "m.ssopmat"
    write_matrix(path, np.eye(2, dtype=complex))
    raw = path.read_bytes()
    assert raw[:16] == MAGIC and len(MAGIC) == 16
    assert int.from_bytes(raw[16:20], "little") == 2
    assert int.from_bytes(raw[20:24], "little") == 2
    assert raw[24] == 0  # complex128 little-endian interleaved
    assert len(raw) == 16 + 9 + 2 * 2 * 16


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.ssopmat"
    path.write_bytes(b"NOTHING!" + b"\x00" * 32)
    with pytest.raises(SchemaError):
        read_matrix(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "m.ssopmat"
    write_matrix(path, np.eye(3, dtype=complex))
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(SchemaError):
        read_matrix(path)


def test_vector_written_as_row(tmp_path):
    path = tmp_path / "v.ssopmat"
    write_matrix(path, np.arange(4.0))
    assert read_matrix(path).shape == (1, 4)


def test_sidecar_optional(tmp_path):
    path = tmp_path / "m.ssopmat"
    write_matrix(path, np.eye(2, dtype=complex))
    assert not sidecar_path(path).exists()
    m, meta = read_matrix(path, with_meta=True)
    assert meta is None


def test_parse_extended_float():
    assert parse_extended_float("1e-3") == 1e-3
    assert parse_extended_float("2.5") == 2.5
    assert np.isclose(parse_extended_float("1e-1.8"), 10.0**-1.8)
    assert np.isclose(parse_extended_float("3e2.5"), 3 * 10.0**2.5)
    with pytest.raises(Exception):
        parse_extended_float("abc")
