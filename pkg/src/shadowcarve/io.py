"""Bit-exact readers and writers for bitmaps and voxel grids.

Three bitmap encodings are supported:

* ``p1``: ASCII PBM ("P1" magic, 1 = black = existent pixel);
* ``p4``: binary PBM ("P4" magic, rows packed MSB-first and padded to a
  byte boundary);
* ``textgrid``: one line per row, ``#`` for 1 and ``.`` for 0.

Grids use the VGRID container: a header line ``VGRID <d> <n>`` followed
by n^d characters ``0``/``1`` in row-major order with a newline every n
characters.  Row-major order matches ``flatten_index`` for d = 3.

Readers are strict: non-square images, malformed headers (reported with
their byte offset) and trailing garbage are all errors.  Writers emit
deterministic bytes, and ``read(write(x)) == x`` for every format.
"""

from __future__ import annotations

import numpy as np

from .core import Bitmap, HyperGrid, VoxelGrid

__all__ = [
    "FormatError",
    "read_bitmap",
    "write_bitmap",
    "read_vgrid",
    "write_vgrid",
    "load_bitmap",
    "save_bitmap",
    "load_vgrid",
    "save_vgrid",
]


class FormatError(ValueError):
    """Malformed input; ``offset`` is the byte position when known."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


def _as_bytes(source) -> bytes:
    if isinstance(source, bytes):
        return source
    if isinstance(source, str):
        return source.encode("ascii")
    raise TypeError(f"expected str or bytes, got {type(source).__name__}")


class _Scanner:
    """PBM token scanner: whitespace separates tokens, '#' starts a comment."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_filler(self):
        data, pos = self.data, self.pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch.isspace():
                pos += 1
            elif ch == b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl + 1
            else:
                break
        self.pos = pos

    def token(self, what: str) -> bytes:
        self.skip_filler()
        start = self.pos
        while self.pos < len(self.data) and not self.data[self.pos : self.pos + 1].isspace():
            self.pos += 1
        if self.pos == start:
            raise FormatError(f"expected {what}", start)
        return self.data[start : self.pos]

    def int_token(self, what: str) -> int:
        start = self.pos
        tok = self.token(what)
        try:
            return int(tok)
        except ValueError:
            raise FormatError(f"expected integer {what}, got {tok!r}", start) from None

    def at_end_ignoring_filler(self) -> bool:
        self.skip_filler()
        return self.pos >= len(self.data)


def _read_pbm_header(scan: _Scanner, magic: bytes) -> int:
    got = scan.token("magic number")
    if got != magic:
        raise FormatError(f"expected magic {magic.decode()}, got {got!r}", 0)
    width = scan.int_token("width")
    height = scan.int_token("height")
    if width != height:
        raise FormatError(f"image is {width}x{height}, must be square")
    if width < 1:
        raise FormatError("image dimensions must be positive")
    return width


def _read_p1(data: bytes) -> Bitmap:
    scan = _Scanner(data)
    n = _read_pbm_header(scan, b"P1")
    bits = np.empty(n * n, dtype=np.uint8)
    count = 0
    # P1 pixels need no separating whitespace, so scan char by char.
    while count < n * n:
        scan.skip_filler()
        if scan.pos >= len(data):
            raise FormatError(f"pixel data ended after {count} of {n * n} pixels", scan.pos)
        ch = data[scan.pos : scan.pos + 1]
        if ch not in (b"0", b"1"):
            raise FormatError(f"invalid pixel character {ch!r}", scan.pos)
        bits[count] = ch == b"1"
        count += 1
        scan.pos += 1
    if not scan.at_end_ignoring_filler():
        raise FormatError("trailing garbage after pixel data", scan.pos)
    return Bitmap(bits.reshape(n, n))


def _read_p4(data: bytes) -> Bitmap:
    scan = _Scanner(data)
    n = _read_pbm_header(scan, b"P4")
    # Exactly one whitespace byte separates the header from the raster.
    if scan.pos >= len(data) or not data[scan.pos : scan.pos + 1].isspace():
        raise FormatError("expected single whitespace before raster data", scan.pos)
    scan.pos += 1
    row_bytes = (n + 7) // 8
    expected = row_bytes * n
    raster = data[scan.pos : scan.pos + expected]
    if len(raster) < expected:
        raise FormatError(
            f"raster truncated: need {expected} bytes, have {len(raster)}", scan.pos
        )
    if scan.pos + expected != len(data):
        raise FormatError("trailing garbage after raster data", scan.pos + expected)
    rows = np.frombuffer(raster, dtype=np.uint8).reshape(n, row_bytes)
    bits = np.unpackbits(rows, axis=1)[:, :n]
    return Bitmap(bits)


def _read_textgrid(data: bytes) -> Bitmap:
    text = data.decode("ascii", errors="replace")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty textgrid")
    n = len(lines[0])
    if len(lines) != n:
        raise FormatError(f"textgrid has {len(lines)} rows of width {n}, must be square")
    bits = np.empty((n, n), dtype=np.uint8)
    offset = 0
    for r, line in enumerate(lines):
        if len(line) != n:
            raise FormatError(f"row {r} has length {len(line)}, expected {n}", offset)
        for c, ch in enumerate(line):
            if ch == "#":
                bits[r, c] = 1
            elif ch == ".":
                bits[r, c] = 0
            else:
                raise FormatError(f"invalid character {ch!r}", offset + c)
        offset += n + 1
    return Bitmap(bits)


def _sniff_format(data: bytes) -> str:
    if data.startswith(b"P1"):
        return "p1"
    if data.startswith(b"P4"):
        return "p4"
    return "textgrid"


def read_bitmap(source, format: str = "auto") -> Bitmap:
    """Parse a bitmap; ``format`` is one of p1, p4, textgrid or auto."""
    data = _as_bytes(source)
    fmt = format.lower()
    if fmt == "auto":
        fmt = _sniff_format(data)
    if fmt == "p1":
        return _read_p1(data)
    if fmt == "p4":
        return _read_p4(data)
    if fmt == "textgrid":
        return _read_textgrid(data)
    raise ValueError(f"unknown bitmap format {format!r}")


def write_bitmap(bitmap: Bitmap, format: str) -> bytes:
    """Serialize a bitmap; exact inverse of :func:`read_bitmap`."""
    n = bitmap.size
    fmt = format.lower()
    if fmt == "p1":
        rows = [" ".join("1" if v else "0" for v in row) for row in bitmap.bits]
        return (f"P1\n{n} {n}\n" + "\n".join(rows) + "\n").encode("ascii")
    if fmt == "p4":
        packed = np.packbits(bitmap.bits, axis=1)
        return f"P4\n{n} {n}\n".encode("ascii") + packed.tobytes()
    if fmt == "textgrid":
        rows = ["".join("#" if v else "." for v in row) for row in bitmap.bits]
        return ("\n".join(rows) + "\n").encode("ascii")
    raise ValueError(f"unknown bitmap format {format!r}")


def read_vgrid(source) -> VoxelGrid | HyperGrid:
    """Parse a VGRID file; d = 3 gives a VoxelGrid, other d a HyperGrid."""
    data = _as_bytes(source)
    nl = data.find(b"\n")
    if nl < 0:
        raise FormatError("missing header line", 0)
    fields = data[:nl].split()
    if len(fields) != 3 or fields[0] != b"VGRID":
        raise FormatError(f"bad header {data[:nl]!r}, expected 'VGRID <d> <n>'", 0)
    try:
        d, n = int(fields[1]), int(fields[2])
    except ValueError:
        raise FormatError(f"non-integer header fields in {data[:nl]!r}", 0) from None
    if d < 2:
        raise FormatError(f"dimension must be >= 2, got {d}")
    if n < 1:
        raise FormatError(f"size must be positive, got {n}")

    body = data[nl + 1 :]
    lines = body.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if len(lines) != n ** (d - 1):
        raise FormatError(
            f"expected {n ** (d - 1)} body lines of {n} characters, got {len(lines)}"
        )
    flat = b"".join(lines)
    if len(flat) != n**d:
        raise FormatError(f"body holds {len(flat)} cells, expected {n**d}")
    cells = np.frombuffer(flat, dtype=np.uint8) - ord("0")
    if cells.size and cells.max() > 1:
        raise FormatError("body may contain only '0' and '1'")
    cells = cells.reshape((n,) * d)
    return VoxelGrid(cells) if d == 3 else HyperGrid(cells)


def write_vgrid(grid: VoxelGrid | HyperGrid) -> bytes:
    """Serialize a grid in VGRID form; exact inverse of :func:`read_vgrid`."""
    cells = grid.cells
    d, n = cells.ndim, cells.shape[0]
    body = np.empty((n ** (d - 1), n + 1), dtype=np.uint8)
    body[:, :n] = cells.reshape(-1, n) + ord("0")
    body[:, n] = ord("\n")
    return f"VGRID {d} {n}\n".encode("ascii") + body.tobytes()


def load_bitmap(path, format: str = "auto") -> Bitmap:
    with open(path, "rb") as fh:
        return read_bitmap(fh.read(), format)


def save_bitmap(path, bitmap: Bitmap, format: str) -> None:
    with open(path, "wb") as fh:
        fh.write(write_bitmap(bitmap, format))


def load_vgrid(path) -> VoxelGrid | HyperGrid:
    with open(path, "rb") as fh:
        return read_vgrid(fh.read())


def save_vgrid(path, grid) -> None:
    with open(path, "wb") as fh:
        fh.write(write_vgrid(grid))
