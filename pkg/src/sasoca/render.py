"""Space-time rendering: binary PGM images and ASCII.

Images follow the PGM convention that 0 is black, so a cell in state 1 is
stored as 0 (black) and a cell in state 0 as 255 (white).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ca import Lattice


def pgm_bytes(image: np.ndarray) -> bytes:
    """Binary (P5) graymap of a 2-D 0/1 array; 1 renders black."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    pixels = (255 - 255 * (img != 0)).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + pixels.tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    """Inverse of :func:`pgm_bytes` (0/1 array)."""
    *header, rest = data.split(b"\n", 3)
    if header[0] != b"P5" or header[2] != b"255":
        raise ValueError("not an 8-bit P5 graymap")
    w, h = map(int, header[1].split())
    return (np.frombuffer(rest, dtype=np.uint8).reshape(h, w) == 0).astype(np.uint8)


def ascii_rows(rows: np.ndarray) -> str:
    return "".join("".join("#" if v else "." for v in row) + "\n" for row in np.asarray(rows))


def ascii_trajectory(traj: np.ndarray, lattice: Lattice) -> str:
    """1-D: one line per step.  2-D/3-D: a ``t=<step>`` header then each grid (3-D: per z slice)."""
    if lattice.ndim == 1:
        return ascii_rows(traj)
    out = []
    for t, config in enumerate(traj):
        grid = config.reshape(lattice.dims)
        out.append(f"t={t}\n")
        if lattice.ndim == 2:
            out.append(ascii_rows(grid))
        else:
            for z in range(grid.shape[-1]):
                out.append(f"z={z}\n" + ascii_rows(grid[..., z]))
    return "".join(out)


def contact_sheet(traj: np.ndarray, dims: tuple[int, int], columns: int = 10, gap: int = 1) -> np.ndarray:
    """Tile 2-D configurations left-to-right, top-to-bottom; gaps are drawn as 0."""
    n = len(traj)
    rows = -(-n // columns)
    h, w = dims
    sheet = np.zeros((rows * (h + gap) - gap, min(n, columns) * (w + gap) - gap), dtype=np.uint8)
    for i, config in enumerate(traj):
        r, c = divmod(i, columns)
        sheet[r * (h + gap) : r * (h + gap) + h, c * (w + gap) : c * (w + gap) + w] = config.reshape(dims)
    return sheet


def write_trajectory(traj: np.ndarray, lattice: Lattice, out_dir: str | Path, sheet: bool = True) -> list[Path]:
    """Write PGM files for one trajectory ``(steps + 1, cells)``; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, img: np.ndarray) -> None:
        p = out / name
        p.write_bytes(pgm_bytes(img))
        written.append(p)

    width = len(str(len(traj) - 1))
    if lattice.ndim == 1:
        put("spacetime.pgm", traj)
    elif lattice.ndim == 2:
        for t, config in enumerate(traj):
            put(f"step_{t:0{width}d}.pgm", config.reshape(lattice.dims))
        if sheet:
            put("sheet.pgm", contact_sheet(traj, lattice.dims))
    else:
        for t, config in enumerate(traj):
            grid = config.reshape(lattice.dims)
            for z in range(grid.shape[-1]):
                put(f"step_{t:0{width}d}_z{z}.pgm", grid[..., z])
    return written
