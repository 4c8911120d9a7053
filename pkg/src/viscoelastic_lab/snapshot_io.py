"""
Binary snapshot files.

Layout, all little-endian:

    magic    4 bytes  b"VELS"
    version  u32      1
    nx, ny   u32      grid size
    lx, ly   f64      strip size
    gamma, mu, lambda, eps, t   f64
    body     7 x ny x nx f64, fields rho, u, v, f1, f2, f3, f4, row-major
"""

from pathlib import Path

import numpy as np

from .errors import SnapshotFormatError
from .grid_ops import Grid, build_grid
from .state_model import FIELD_NAMES, PhysParams, StateSnapshot

MAGIC = b"VELS"
VERSION = 1

HEADER_DTYPE = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("nx", "<u4"),
        ("ny", "<u4"),
        ("lx", "<f8"),
        ("ly", "<f8"),
        ("gamma", "<f8"),
        ("mu", "<f8"),
        ("lam", "<f8"),
        ("eps", "<f8"),
        ("t", "<f8"),
    ]
)
BODY_DTYPE = np.dtype("<f8")


def encode_snapshot(state: StateSnapshot, grid: Grid, params: PhysParams) -> bytes:
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (
        MAGIC,
        VERSION,
        grid.nx,
        grid.ny,
        grid.lx,
        grid.ly,
        params.gamma,
        params.mu,
        params.lam,
        params.eps,
        state.t,
    )
    body = np.stack([np.asarray(getattr(state, name), dtype=BODY_DTYPE) for name in FIELD_NAMES])
    if body.shape[1:] != grid.shape:
        raise SnapshotFormatError(f"state shape {body.shape[1:]} does not match grid {grid.shape}")
    return header.tobytes() + np.ascontiguousarray(body).tobytes()


def decode_snapshot(data: bytes) -> tuple[StateSnapshot, PhysParams, Grid]:
    """
    Parse the bytes of a snapshot file.

    Raises:
        SnapshotFormatError: On a bad magic, an unsupported version, a corrupt
            header or a body of the wrong length.
    """
    if len(data) < HEADER_DTYPE.itemsize:
        if not data.startswith(MAGIC[: len(data)]) or len(data) < len(MAGIC):
            raise SnapshotFormatError("bad magic")
        raise SnapshotFormatError("corrupt header: file shorter than the header")
    header = np.frombuffer(data, dtype=HEADER_DTYPE, count=1)[0]
    if bytes(header["magic"]) != MAGIC:
        raise SnapshotFormatError("bad magic")
    if int(header["version"]) != VERSION:
        raise SnapshotFormatError(f"unsupported version {int(header['version'])}")

    try:
        grid = build_grid(
            int(header["nx"]), int(header["ny"]), float(header["lx"]), float(header["ly"])
        )
        params = PhysParams(
            gamma=float(header["gamma"]),
            mu=float(header["mu"]),
            lam=float(header["lam"]),
            eps=float(header["eps"]),
        )
    except ValueError as e:
        raise SnapshotFormatError(f"corrupt header: {e}") from e
    t = float(header["t"])
    if not np.isfinite(t):
        raise SnapshotFormatError("corrupt header: non-finite time")

    expected = len(FIELD_NAMES) * grid.ny * grid.nx * BODY_DTYPE.itemsize
    body = data[HEADER_DTYPE.itemsize :]
    if len(body) < expected:
        raise SnapshotFormatError(
            f"truncated body: expected {expected} bytes, found {len(body)}"
        )
    if len(body) > expected:
        raise SnapshotFormatError(f"trailing bytes after body: {len(body) - expected}")

    fields = np.frombuffer(body, dtype=BODY_DTYPE).reshape(len(FIELD_NAMES), grid.ny, grid.nx)
    state = StateSnapshot.from_fields(
        {name: fields[k].astype(float) for k, name in enumerate(FIELD_NAMES)}, t=t
    )
    return state, params, grid


def persist_snapshot(
    state: StateSnapshot, grid: Grid, params: PhysParams, path: str | Path
) -> Path:
    """Write a snapshot file, creating parent directories as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_snapshot(state, grid, params))
    return path


def load_snapshot(path: str | Path) -> tuple[StateSnapshot, PhysParams, Grid]:
    """
    Read a snapshot file written by ``persist_snapshot``.

    Only gamma, mu, lambda and eps travel in the file; the remaining
    parameters come back at their defaults.
    """
    return decode_snapshot(Path(path).read_bytes())
