"""Image file I/O and RGB-to-label quantization.

Only the binary netpbm formats are supported: 8-bit P5 (PGM) loads
directly as a LabelImage over the 256 gray levels, 8-bit P6 (PPM) loads
as an RgbImage.  Both are dependency-free and bit-exactly specifiable,
which keeps mask round trips lossless.  Color images are reduced to a
label alphabet by recursively splitting the RGB point cloud with random
hyperplanes through each cell's center of mass until every cell holds at
most `max_bucket` pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import BinaryMask, LabelImage

_WHITESPACE = b" \t\r\n\x0b\x0c"


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB raster."""

    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if px.ndim != 3 or px.shape[2] != 3 or px.size < 3:
            raise ValueError(f"pixels must be (h, w, 3), got shape {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class Palette:
    """Quantization output: one RGB centroid and pixel count per label."""

    centroids: np.ndarray  # (k, 3) float64
    counts: np.ndarray  # (k,) int64

    def __post_init__(self):
        c = np.ascontiguousarray(self.centroids, dtype=np.float64)
        n = np.ascontiguousarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[1] != 3 or c.shape[0] != n.size or c.shape[0] < 1:
            raise ValueError("centroids must be (k, 3) with matching counts")
        c.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "centroids", c)
        object.__setattr__(self, "counts", n)

    @property
    def k(self) -> int:
        return self.counts.size

    def to_json(self) -> str:
        entries = [
            {
                "label": i,
                "rgb_centroid": [float(v) for v in self.centroids[i]],
                "count": int(self.counts[i]),
            }
            for i in range(self.k)
        ]
        return json.dumps(entries, indent=1)


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise ValueError(f"malformed netpbm header: unexpected end of file at byte offset {pos}")
    start = pos
    while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
        pos += 1
    return data[start:pos], pos


def _parse_header(data: bytes, path) -> tuple[bytes, int, int, int, int]:
    magic, pos = _next_token(data, 0)
    if magic not in (b"P5", b"P6"):
        raise ValueError(
            f"{path}: unsupported netpbm format {magic!r} at byte offset 0 "
            "(only binary P5/P6 are supported)"
        )
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_token(data, pos)
        if not token.isdigit():
            raise ValueError(
                f"{path}: malformed {name} token {token!r} at byte offset {pos - len(token)}"
            )
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise ValueError(f"{path}: non-positive dimensions {width}x{height}")
    if not (1 <= maxval <= 255):
        raise ValueError(f"{path}: unsupported bit depth (maxval {maxval}; need 8-bit)")
    if pos >= len(data) or data[pos] not in _WHITESPACE:
        raise ValueError(f"{path}: missing raster separator at byte offset {pos}")
    pos += 1  # exactly one whitespace byte before the raster
    return magic, width, height, maxval, pos


def load_image(path) -> LabelImage | RgbImage:
    """Load a binary PGM (-> LabelImage with k = 256) or PPM (-> RgbImage)."""
    data = Path(path).read_bytes()
    magic, width, height, maxval, pos = _parse_header(data, path)
    channels = 1 if magic == b"P5" else 3
    need = width * height * channels
    if len(data) - pos < need:
        raise ValueError(
            f"{path}: truncated raster at byte offset {len(data)} "
            f"(expected {need} bytes from offset {pos})"
        )
    raster = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos)
    if magic == b"P5":
        return LabelImage(raster.reshape(height, width).astype(np.int32), 256)
    return RgbImage(raster.reshape(height, width, 3))


def save_image(img: LabelImage, path) -> None:
    """Write a LabelImage (k <= 256) as a binary 8-bit PGM."""
    if img.k > 256:
        raise ValueError(f"cannot store alphabet size {img.k} in an 8-bit PGM")
    header = f"P5\n{img.width} {img.height}\n255\n".encode()
    Path(path).write_bytes(header + img.labels.astype(np.uint8).tobytes())


def save_mask(mask: BinaryMask, path) -> None:
    """Write a BinaryMask as a binary PGM with values 0 and 255."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode()
    Path(path).write_bytes(header + (mask.bits * np.uint8(255)).tobytes())


def load_mask(path) -> BinaryMask:
    """Read a mask PGM written by save_mask (values must be exactly 0 or 255)."""
    img = load_image(path)
    if not isinstance(img, LabelImage):
        raise ValueError(f"{path}: expected a PGM mask, got a color image")
    values = np.unique(img.labels)
    if not np.all(np.isin(values, (0, 255))):
        raise ValueError(f"{path}: mask values must be 0 or 255, found {values[:5]}")
    return BinaryMask((img.labels == 255).astype(np.uint8))


def _gray_render(img: LabelImage) -> np.ndarray:
    scale = 255 // (img.k - 1) if img.k > 1 else 0
    return (img.labels * scale).astype(np.uint8)


def save_overlay(img: LabelImage | RgbImage, mask: BinaryMask, path) -> None:
    """Write a PPM of the image with the mask contour recolored red."""
    if (img.height, img.width) != (mask.height, mask.width):
        raise ValueError("overlay image and mask dimensions differ")
    if isinstance(img, LabelImage):
        gray = _gray_render(img)
        rgb = np.stack([gray, gray, gray], axis=2)
    else:
        rgb = img.pixels.copy()
    bits = mask.bits
    contour = np.zeros(bits.shape, dtype=bool)
    contour[:, 1:] |= bits[:, 1:] != bits[:, :-1]
    contour[:, :-1] |= bits[:, 1:] != bits[:, :-1]
    contour[1:, :] |= bits[1:, :] != bits[:-1, :]
    contour[:-1, :] |= bits[1:, :] != bits[:-1, :]
    rgb[contour] = (255, 0, 0)
    header = f"P6\n{mask.width} {mask.height}\n255\n".encode()
    Path(path).write_bytes(header + rgb.astype(np.uint8).tobytes())


def quantize_colors(
    img: RgbImage, max_bucket: int = 1000, seed: int = 0
) -> tuple[LabelImage, Palette]:
    """Reduce an RGB image to a label alphabet by random hyperplane splits.

    Each cell with more than max_bucket pixels is split by the sign of the
    projection onto a random unit normal through the cell's center of
    mass; degenerate draws (everything on one side) are retried up to 32
    times and then replaced by a median split along the highest-variance
    channel.  Cells of indistinguishable colors that still exceed
    max_bucket become leaves as-is.  Leaves are numbered depth-first, so
    the labeling is deterministic for a fixed seed.
    """
    if max_bucket < 1:
        raise ValueError(f"max_bucket must be >= 1, got {max_bucket}")
    pts = img.pixels.reshape(-1, 3).astype(np.float64)
    n = pts.shape[0]
    rng = np.random.default_rng(seed)
    labels = np.empty(n, dtype=np.int32)
    centroids: list[np.ndarray] = []
    counts: list[int] = []

    stack: list[np.ndarray] = [np.arange(n, dtype=np.int64)]
    while stack:
        idx = stack.pop()
        cell = pts[idx]
        if idx.size <= max_bucket:
            split = None
        else:
            split = _split_cell(cell, rng)
        if split is None:
            label = len(centroids)
            labels[idx] = label
            centroids.append(cell.mean(axis=0))
            counts.append(idx.size)
            continue
        stack.append(idx[split])  # right child
        stack.append(idx[~split])  # left child, popped (and numbered) first
    return (
        LabelImage(labels.reshape(img.height, img.width), len(centroids)),
        Palette(np.asarray(centroids), np.asarray(counts, dtype=np.int64)),
    )


def _split_cell(cell: np.ndarray, rng: np.random.Generator):
    """Boolean right-side selector for one cell, or None if unsplittable."""
    center = cell.mean(axis=0)
    for _ in range(32):
        normal = rng.standard_normal(3)
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        side = (cell - center) @ (normal / norm) > 0.0
        hits = int(side.sum())
        if 0 < hits < side.size:
            return side
    channel = int(np.argmax(cell.var(axis=0)))
    median = np.median(cell[:, channel])
    side = cell[:, channel] > median
    hits = int(side.sum())
    if 0 < hits < side.size:
        return side
    return None  # all colors identical: forced leaf
