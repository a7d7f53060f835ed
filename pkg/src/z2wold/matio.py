"""Serialization of dense complex matrices and (U, P, tau) triples.

Single matrices use a small self-describing binary format:

    line 1: ``Z2WOLDMAT 1``            (ascii, newline-terminated)
    line 2: ``<rows> <cols>``          (ascii decimals)
    body:   rows*cols little-endian float64 pairs, row-major, (real, imag)

Operator triples travel as NumPy ``.npz`` archives with keys ``unitary``,
``projection`` and ``time_reversal`` (the unitary part of the antiunitary).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

MAGIC = b"Z2WOLDMAT 1\n"

__all__ = ["MAGIC", "save_matrix", "load_matrix", "save_pair", "load_pair"]


def save_matrix(path, m: np.ndarray) -> None:
    m = np.ascontiguousarray(np.asarray(m, dtype=complex))
    if m.ndim != 2:
        raise ValueError(f"expected a 2d array, got shape {m.shape}")
    interleaved = np.empty(m.shape + (2,), dtype="<f8")
    interleaved[..., 0] = m.real
    interleaved[..., 1] = m.imag
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(f"{m.shape[0]} {m.shape[1]}\n".encode("ascii"))
        fh.write(interleaved.tobytes())


def load_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.readline()
        if magic != MAGIC:
            raise ValueError(f"{path}: not a Z2WOLDMAT file (header {magic!r})")
        dims = fh.readline().split()
        if len(dims) != 2:
            raise ValueError(f"{path}: malformed dimension header")
        rows, cols = int(dims[0]), int(dims[1])
        body = fh.read()
    expect = rows * cols * 16
    if len(body) != expect:
        raise ValueError(f"{path}: body has {len(body)} bytes, expected {expect}")
    flat = np.frombuffer(body, dtype="<f8").reshape(rows, cols, 2)
    return (flat[..., 0] + 1j * flat[..., 1]).astype(complex)


def save_pair(path, unitary: np.ndarray, projection: np.ndarray,
              time_reversal: np.ndarray) -> None:
    np.savez(
        Path(path),
        unitary=np.asarray(unitary, dtype=complex),
        projection=np.asarray(projection, dtype=complex),
        time_reversal=np.asarray(time_reversal, dtype=complex),
    )


def load_pair(path):
    with np.load(Path(path)) as data:
        missing = {"unitary", "projection", "time_reversal"} - set(data.files)
        if missing:
            raise ValueError(f"{path}: pair file missing arrays {sorted(missing)}")
        return (
            np.asarray(data["unitary"], dtype=complex),
            np.asarray(data["projection"], dtype=complex),
            np.asarray(data["time_reversal"], dtype=complex),
        )
