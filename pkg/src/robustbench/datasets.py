"""Dataset readers: CSV (label first) and the big-endian IDX format of MNIST."""
from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import as_bounds
from .errors import ConfigError, CountMismatch, MagicMismatch, ParseError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    inputs: list
    labels: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.inputs) != len(self.labels):
            raise CountMismatch(f"{len(self.inputs)} inputs but {len(self.labels)} labels")

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(zip(self.inputs, self.labels))


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, input_shape=None) -> Dataset:
    """One row per sample: integer label, then the flattened features.

    A header row is recognised by a non-numeric first cell.
    """
    inputs, labels = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0].strip()):
                continue
            try:
                label = int(row[0])
                values = np.array([float(c) for c in row[1:]], dtype=np.float64)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
            if label < 0:
                raise ParseError(f"{path}:{lineno}: negative label {label}")
            if not np.all(np.isfinite(values)):
                raise ParseError(f"{path}:{lineno}: non-finite feature value")
            if input_shape is not None:
                if values.size != int(np.prod(input_shape)):
                    raise ParseError(
                        f"{path}:{lineno}: {values.size} features, expected shape {tuple(input_shape)}"
                    )
                values = values.reshape(input_shape)
            elif inputs and values.size != inputs[0].size:
                raise ParseError(f"{path}:{lineno}: {values.size} features, previous rows had {inputs[0].size}")
            inputs.append(values)
            labels.append(label)
    return Dataset(inputs, labels, {"path": str(path), "format": "csv", "count": len(labels)})


def write_csv(path, inputs, labels, header=False) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header and len(inputs):
            writer.writerow(["label"] + [f"x{i}" for i in range(np.asarray(inputs[0]).size)])
        for x, y in zip(inputs, labels):
            writer.writerow([int(y)] + [repr(float(v)) for v in np.asarray(x).reshape(-1)])


def _read_bytes(path):
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _idx_header(buf, path):
    if len(buf) < 4:
        raise ParseError(f"{path}: file too short for an IDX header")
    (magic,) = struct.unpack(">I", buf[:4])
    ndim = magic & 0xFF
    if len(buf) < 4 + 4 * ndim:
        raise ParseError(f"{path}: truncated IDX dimensions")
    dims = struct.unpack(f">{ndim}I", buf[4 : 4 + 4 * ndim])
    return magic, dims, 4 + 4 * ndim


def read_idx(path, expected_magic):
    buf = _read_bytes(path)
    magic, dims, offset = _idx_header(buf, path)
    if magic != expected_magic:
        raise MagicMismatch(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}")
    count = int(np.prod(dims))
    if len(buf) - offset != count:
        raise ParseError(f"{path}: expected {count} data bytes, found {len(buf) - offset}")
    return np.frombuffer(buf, dtype=np.uint8, offset=offset).reshape(dims)


def write_idx(path, array, magic) -> None:
    array = np.asarray(array, dtype=np.uint8)
    header = struct.pack(">I", magic) + struct.pack(f">{array.ndim}I", *array.shape)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(header + array.tobytes())


def _find_idx_pair(path, labels_path):
    path = Path(path)
    if path.is_dir():
        images = labels = None
        for f in sorted(path.iterdir()):
            if not f.is_file():
                continue
            try:
                magic = struct.unpack(">I", _read_bytes(f)[:4])[0]
            except (OSError, struct.error, EOFError):
                continue
            if magic == IDX_IMAGES_MAGIC and images is None:
                images = f
            elif magic == IDX_LABELS_MAGIC and labels is None:
                labels = f
        if images is None or labels is None:
            raise ParseError(f"{path}: directory needs one IDX image file and one IDX label file")
        return images, labels
    if labels_path is None:
        guess = path.name.replace("images", "labels").replace("idx3", "idx1")
        if guess == path.name:
            raise ConfigError(f"{path}: cannot infer the IDX label file; pass it explicitly")
        labels_path = path.with_name(guess)
    return path, Path(labels_path)


def load_idx(path, labels_path=None, bounds=(0.0, 255.0)) -> Dataset:
    """Images scaled from bytes to ``bounds`` via ``v * (max - min) / 255 + min``."""
    images_path, labels_path = _find_idx_pair(path, labels_path)
    images = read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.ndim != 3 or labels.ndim != 1:
        raise ParseError(f"{images_path}: expected images [n, h, w] and labels [n]")
    if images.shape[0] != labels.shape[0]:
        raise CountMismatch(f"{images.shape[0]} images but {labels.shape[0]} labels")
    b = as_bounds(bounds)
    scaled = images.astype(np.float64) * (b.range / 255.0) + b.min
    return Dataset(
        [img for img in scaled],
        [int(v) for v in labels],
        {"path": str(path), "format": "idx", "count": int(labels.shape[0])},
    )


def load_dataset(path, format="csv", bounds=(0.0, 1.0), input_shape=None, labels_path=None) -> Dataset:
    if format == "csv":
        return load_csv(path, input_shape)
    if format == "idx":
        data = load_idx(path, labels_path, bounds)
        if input_shape is not None:
            data.inputs = [x.reshape(input_shape) for x in data.inputs]
        return data
    raise ConfigError(f"unknown dataset format {format!r}; use 'csv' or 'idx'")


def load_precomputed(path, format="csv", bounds=(0.0, 1.0), input_shape=None):
    """Read a precomputed-candidate table from a directory.

    The directory holds two datasets in the same format with rows paired by
    position: ``inputs.csv``/``candidates.csv`` for CSV, or
    ``inputs/``/``candidates/`` IDX directories.
    """
    from .attacks import PrecomputedImagesAttack

    path = Path(path)
    name = "{}.csv" if format == "csv" else "{}"
    inputs = load_dataset(path / name.format("inputs"), format, bounds, input_shape)
    candidates = load_dataset(path / name.format("candidates"), format, bounds, input_shape)
    if len(inputs) != len(candidates):
        raise CountMismatch(f"{len(inputs)} inputs but {len(candidates)} candidates")
    return PrecomputedImagesAttack(inputs.inputs, candidates.inputs)
