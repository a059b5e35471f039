import struct
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from irgd import IdxParseError
from irgd.mnist import (
    load_idx_labels,
    load_mnist_idx,
    mnist_pca_instance,
    parse_idx_images,
    parse_idx_labels,
    write_idx_images,
)
from irgd.problems import verify_manifest

DATA = Path(__file__).parent / "data"

# The committed fixture, written out byte by byte.
FIXTURE_BYTES = struct.pack(">IIII", 0x803, 2, 2, 2) + bytes([0, 255, 128, 64, 1, 2, 3, 4])


def test_fixture_file_has_expected_bytes():
    assert (DATA / "mnist-2x2.idx3-ubyte").read_bytes() == FIXTURE_BYTES


def test_fixture_loads_exactly():
    data, manifest = load_mnist_idx(DATA / "mnist-2x2.idx3-ubyte")
    expected = np.array([[0, 255, 128, 64], [1, 2, 3, 4]]) / 255.0
    np.testing.assert_array_equal(data, expected)
    assert data.shape == (2, 4)
    assert manifest.source == "mnist-idx" and verify_manifest(manifest)


def test_bad_magic_fixture():
    with pytest.raises(IdxParseError, match="expected image tensor magic") as exc:
        load_mnist_idx(DATA / "bad-magic.idx3-ubyte")
    assert exc.value.offset == 0
    assert "0x00000801" in str(exc.value)


def test_truncated_fixture():
    with pytest.raises(IdxParseError, match="truncated payload") as exc:
        load_mnist_idx(DATA / "truncated.idx3-ubyte")
    # 8 payload bytes declared, 5 present after the 16-byte header.
    assert exc.value.offset == 21
    assert "byte offset 21" in str(exc.value)


@pytest.mark.parametrize("cut,offset", [(0, 0), (3, 0), (6, 4), (10, 8), (15, 12)])
def test_truncated_header_reports_offset(cut, offset):
    with pytest.raises(IdxParseError, match="truncated header") as exc:
        parse_idx_images(FIXTURE_BYTES[:cut])
    assert exc.value.offset == offset


def test_dimension_overflow():
    buf = struct.pack(">IIII", 0x803, 0xFFFFFFFF, 0xFFFF, 0xFFFF)
    with pytest.raises(IdxParseError, match="dimension overflow") as exc:
        parse_idx_images(buf)
    assert exc.value.offset == 4


def test_labels_parse_and_reject_image_magic(tmp_path):
    buf = struct.pack(">II", 0x801, 3) + bytes([7, 0, 9])
    np.testing.assert_array_equal(parse_idx_labels(buf), [7, 0, 9])
    p = tmp_path / "labels.idx1-ubyte"
    p.write_bytes(buf)
    np.testing.assert_array_equal(load_idx_labels(p), [7, 0, 9])
    with pytest.raises(IdxParseError, match="label vector magic"):
        parse_idx_labels(FIXTURE_BYTES)


@settings(max_examples=30, deadline=None)
@given(count=st.integers(1, 4), rows=st.integers(1, 5), cols=st.integers(1, 5), seed=st.integers(0, 1000))
def test_property_write_parse_roundtrip(tmp_path_factory, count, rows, cols, seed):
    images = np.random.default_rng(seed).integers(0, 256, size=(count, rows, cols), dtype=np.uint8)
    p = tmp_path_factory.mktemp("idx") / "img.idx3-ubyte"
    write_idx_images(p, images)
    np.testing.assert_array_equal(parse_idx_images(p.read_bytes()), images)


def test_mnist_pca_instance_subsample_and_scaling():
    rng = np.random.default_rng(0)
    data = rng.integers(0, 256, size=(50, 9)) / 255.0
    inst = mnist_pca_instance(data, 2, subsample=20, seed=1)
    again = mnist_pca_instance(data, 2, subsample=20, seed=1)
    np.testing.assert_array_equal(inst.H, again.H)
    full = mnist_pca_instance(data, 2, subsample=None)
    np.testing.assert_allclose(full.H, data.T @ data / 50, rtol=1e-14)
    assert inst.p == 2
