"""PGM (P2/P5) reading and writing, plus synthetic test images."""
from __future__ import annotations

import numpy as np


class ImageFormatError(ValueError):
    pass


def _tokens(data: bytes, count: int, pos: int) -> tuple[list[int], int]:
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and (data[pos:pos + 1].isspace() or data[pos:pos + 1] == b"#"):
            if data[pos:pos + 1] == b"#":
                while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PGM header or data")
        try:
            out.append(int(data[start:pos]))
        except ValueError:
            raise ImageFormatError(f"bad PGM token {data[start:pos]!r}") from None
    return out, pos


def parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError("not a PGM file (expected P2 or P5)")
    (w, h, maxval), pos = _tokens(data, 3, 2)
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise ImageFormatError(f"bad PGM header: {w}x{h}, maxval {maxval}")
    if magic == b"P2":
        vals, _ = _tokens(data, w * h, pos)
        img = np.array(vals, dtype=np.int64).reshape(h, w)
    else:
        pos += 1  # single whitespace byte after maxval
        width = 1 if maxval < 256 else 2
        raw = data[pos:pos + w * h * width]
        if len(raw) != w * h * width:
            raise ImageFormatError("truncated P5 raster")
        img = np.frombuffer(raw, dtype=">u2" if width == 2 else np.uint8).astype(np.int64).reshape(h, w)
    if img.max(initial=0) > maxval:
        raise ImageFormatError("pixel value exceeds maxval")
    return img, maxval


def read_pgm(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as f:
        return parse_pgm(f.read())


def format_pgm(img, maxval: int | None = None, binary: bool = True) -> bytes:
    img = np.asarray(img, dtype=np.int64)
    if img.ndim != 2:
        raise ImageFormatError("PGM images are 2D")
    if img.size and img.min() < 0:
        raise ImageFormatError("PGM pixels must be nonnegative")
    maxval = int(maxval if maxval is not None else max(1, int(img.max(initial=1))))
    if not 0 < maxval < 65536 or img.max(initial=0) > maxval:
        raise ImageFormatError(f"maxval {maxval} cannot hold the image")
    h, w = img.shape
    if binary:
        head = f"P5\n{w} {h}\n{maxval}\n".encode()
        body = img.astype(">u2" if maxval > 255 else np.uint8).tobytes()
        return head + body
    lines = [f"P2\n{w} {h}\n{maxval}"] + [" ".join(str(v) for v in row) for row in img]
    return ("\n".join(lines) + "\n").encode()


def write_pgm(path, img, maxval: int | None = None, binary: bool = True):
    with open(path, "wb") as f:
        f.write(format_pgm(img, maxval, binary))


def qr_like(n: int = 45, seed: int = 0) -> np.ndarray:
    """Binary n x n image with QR-style finder and timing patterns over random modules."""
    rng = np.random.default_rng(seed)
    img = rng.integers(0, 2, (n, n))
    finder = np.ones((7, 7), dtype=np.int64)
    finder[1:6, 1:6] = 0
    finder[2:5, 2:5] = 1
    for r, c in ((0, 0), (0, n - 7), (n - 7, 0)):
        img[max(r - 1, 0):r + 8, max(c - 1, 0):c + 8] = 0
        img[r:r + 7, c:c + 7] = finder
    img[6, 8:n - 8] = np.arange(8, n - 8) % 2 == 0
    img[8:n - 8, 6] = np.arange(8, n - 8) % 2 == 0
    return img.astype(np.int64)
