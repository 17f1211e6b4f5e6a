"""Matrix, label, split, and target file formats.

Feature and embedding matrices are TSV (one row per line, tab-separated
decimals) or binary: the 8-byte magic ``NDMFEAT1``, rows and cols as
little-endian uint64, then ``rows * cols`` little-endian float32 row-major.
Embeddings carry a sidecar ``<path>.ids`` listing the node id of each row.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"NDMFEAT1"
SPLIT_NAMES = ("train", "val", "test")


class FormatError(ValueError):
    pass


def _is_binary(path: Path) -> bool:
    with path.open("rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"matrix file not found: {path}")
    if _is_binary(path):
        return read_binary(path)
    return read_tsv(path)


def read_tsv(path) -> np.ndarray:
    rows = []
    width = None
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                row = [float(v) for v in line.split("\t")]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-numeric value") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise FormatError(f"{path}:{lineno}: expected {width} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise FormatError(f"{path}: empty matrix")
    x = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise FormatError(f"{path}: non-finite values")
    return x


def write_tsv(path, x) -> None:
    x = np.asarray(x, dtype=np.float64)
    np.savetxt(path, x, delimiter="\t", fmt="%.17g")


def read_binary(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise FormatError(f"{path}: bad magic")
    if len(data) < 24:
        raise FormatError(f"{path}: truncated header")
    rows, cols = struct.unpack("<QQ", data[8:24])
    body = data[24:]
    if len(body) != rows * cols * 4:
        raise FormatError(f"{path}: expected {rows * cols * 4} payload bytes, got {len(body)}")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).copy()


def write_binary(path, x) -> None:
    x = np.ascontiguousarray(x, dtype="<f4")
    if x.ndim != 2:
        raise ValueError("binary format stores 2-D matrices")
    with Path(path).open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", x.shape[0], x.shape[1]))
        fh.write(x.tobytes())


def write_matrix(path, x, fmt: str | None = None) -> None:
    path = Path(path)
    if fmt is None:
        fmt = "binary" if path.suffix in (".bin", ".ndm") else "tsv"
    if fmt == "binary":
        write_binary(path, x)
    elif fmt == "tsv":
        write_tsv(path, x)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def write_embedding(path, z, ids, fmt: str | None = None) -> None:
    write_matrix(path, z, fmt)
    Path(f"{path}.ids").write_text("".join(f"{int(i)}\n" for i in ids))


def read_embedding(path) -> tuple[np.ndarray, np.ndarray]:
    """Embedding rows and their node ids (``0..rows-1`` without a sidecar)."""
    z = read_matrix(path)
    side = Path(f"{path}.ids")
    if side.exists():
        ids = np.array([int(s) for s in side.read_text().split()], dtype=np.int64)
        if ids.shape[0] != z.shape[0]:
            raise FormatError(f"{side}: {ids.shape[0]} ids for {z.shape[0]} rows")
    else:
        ids = np.arange(z.shape[0], dtype=np.int64)
    return z, ids


def read_labels(path) -> dict[int, int]:
    """``node<TAB>label`` lines."""
    out = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected 'node label'")
            out[int(parts[0])] = int(parts[1])
    return out


def write_labels(path, labels) -> None:
    items = labels.items() if isinstance(labels, dict) else enumerate(labels)
    Path(path).write_text("".join(f"{int(u)}\t{int(c)}\n" for u, c in items))


def read_split(path) -> dict[str, np.ndarray]:
    """``node<TAB>train|val|test`` lines."""
    out = {k: [] for k in SPLIT_NAMES}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or parts[1] not in out:
                raise FormatError(f"{path}:{lineno}: expected 'node train|val|test'")
            out[parts[1]].append(int(parts[0]))
    split = {k: np.asarray(v, dtype=np.int64) for k, v in out.items()}
    seen = np.concatenate(list(split.values()))
    if np.unique(seen).size != seen.size:
        raise FormatError(f"{path}: a node appears in more than one split")
    return split


def write_split(path, split) -> None:
    lines = [f"{int(u)}\t{name}\n" for name in SPLIT_NAMES for u in split.get(name, [])]
    Path(path).write_text("".join(lines))


def read_targets(source, n: int) -> np.ndarray:
    if source == "all":
        return np.arange(n, dtype=np.int64)
    ids = np.array([int(s) for s in Path(source).read_text().split()], dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= n):
        raise IndexError("target id out of range")
    return ids


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_kv_config(path) -> dict[str, str]:
    """``key=value`` lines; ``#`` comments and blank lines are skipped."""
    out = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise FormatError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out
