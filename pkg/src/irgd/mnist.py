"""Reader for the IDX tensor format used by the MNIST distribution files.

Layout (all integers unsigned 32-bit big-endian)::

    offset 0   magic   0x00000803 for images, 0x00000801 for labels
    offset 4   count
    offset 8   rows    (images only)
    offset 12  cols    (images only)
    then count * rows * cols unsigned bytes, row-major
"""

import hashlib
import struct
from pathlib import Path

import numpy as np

from .errors import IdxParseError
from .problems import DatasetManifest, PcaInstance

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
MAX_ELEMENTS = 1 << 34


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _u32(buf, offset, what):
    if len(buf) < offset + 4:
        raise IdxParseError(f"truncated header: missing {what}", offset)
    return struct.unpack_from(">I", buf, offset)[0]


def _payload(buf, offset, nbytes):
    avail = len(buf) - offset
    if avail < nbytes:
        raise IdxParseError(
            f"truncated payload: expected {nbytes} bytes, found {avail}", offset + avail
        )
    return np.frombuffer(buf, dtype=np.uint8, count=nbytes, offset=offset)


def parse_idx_images(buf):
    """Parse image IDX bytes into a (count, rows, cols) uint8 array."""
    magic = _u32(buf, 0, "magic number")
    if magic != IMAGE_MAGIC:
        raise IdxParseError(
            f"expected image tensor magic 0x{IMAGE_MAGIC:08x}, got 0x{magic:08x}", 0
        )
    count = _u32(buf, 4, "image count")
    rows = _u32(buf, 8, "row count")
    cols = _u32(buf, 12, "column count")
    total = count * rows * cols
    if total > MAX_ELEMENTS:
        raise IdxParseError(f"dimension overflow: {count} x {rows} x {cols} elements", 4)
    return _payload(buf, 16, total).reshape(count, rows, cols)


def parse_idx_labels(buf):
    magic = _u32(buf, 0, "magic number")
    if magic != LABEL_MAGIC:
        raise IdxParseError(
            f"expected label vector magic 0x{LABEL_MAGIC:08x}, got 0x{magic:08x}", 0
        )
    count = _u32(buf, 4, "label count")
    if count > MAX_ELEMENTS:
        raise IdxParseError(f"dimension overflow: {count} labels", 4)
    return _payload(buf, 8, count)


def load_mnist_idx(images_path):
    """Load an image IDX file as a count x (rows*cols) matrix scaled to [0, 1].

    Returns the matrix and a manifest carrying the file digest.
    """
    buf = Path(images_path).read_bytes()
    images = parse_idx_images(buf)
    count, rows, cols = images.shape
    data = images.reshape(count, rows * cols).astype(float) / 255.0
    params = {"path": str(images_path), "count": count, "rows": rows, "cols": cols}
    return data, DatasetManifest("mnist-idx", params, hashlib.sha256(buf).hexdigest())


def load_idx_labels(labels_path):
    return parse_idx_labels(Path(labels_path).read_bytes())


def mnist_pca_instance(data, p, subsample=1000, seed=0, manifest=None):
    """PCA instance with H = A^T A / count over a seeded row subsample of ``data``."""
    count = data.shape[0]
    if subsample is not None and subsample < count:
        idx = np.sort(np.random.default_rng(seed).choice(count, size=subsample, replace=False))
        data = data[idx]
    H = data.T @ data / data.shape[0]
    return PcaInstance(0.5 * (H + H.T), p, manifest)


def write_idx_images(path, images):
    """Write a (count, rows, cols) uint8 array as an image IDX file."""
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    header = struct.pack(">IIII", IMAGE_MAGIC, count, rows, cols)
    Path(path).write_bytes(header + images.tobytes())
