"""Point-cloud serialization and rasterization.

CSV files carry one row per point with the 1-based letter first, floats
formatted with 17 significant digits so a round trip is bit-exact.  Images
are binary PPM (P6), painted letter by letter in ascending order so output
bytes are a pure function of the input cloud.
"""

from __future__ import annotations

import colorsys

import numpy as np

from .core import DomainError, ParseError
from .fractal import RauzyApprox

_BASE_COLORS = [(230, 57, 70), (69, 123, 157), (42, 157, 143)]
_GOLDEN_ANGLE = 137.50776405003785


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def default_colors(d: int) -> list[tuple[int, int, int]]:
    """Fixed palette for the first three letters, then golden-angle hues."""
    colors = list(_BASE_COLORS[:d])
    for i in range(len(colors), d):
        hue = (i * _GOLDEN_ANGLE) % 360.0
        r, g, b = colorsys.hsv_to_rgb(hue / 360.0, 0.62, 0.88)
        colors.append((int(round(r * 255)), int(round(g * 255)), int(round(b * 255))))
    return colors


def write_points_csv(approx: RauzyApprox, path: str) -> None:
    k = approx.d - 1
    header = "letter," + ",".join(f"x{i + 1}" for i in range(k))
    with open(path, "w", encoding="ascii", newline="\n") as f:
        f.write(header + "\n")
        for letter in sorted(approx.points):
            for row in approx.points[letter]:
                f.write(str(letter) + "," + ",".join(format_float(v) for v in row) + "\n")


def read_points_csv(path: str) -> RauzyApprox:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        cols = header.split(",")
        if len(cols) < 2 or cols[0] != "letter" or cols[1] != "x1":
            raise ParseError(f"{path}: not a points CSV (header {header!r})")
        k = len(cols) - 1
        buckets: dict[int, list[list[float]]] = {}
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != k + 1:
                raise ParseError(f"{path} line {lineno}: expected {k + 1} fields")
            try:
                letter = int(fields[0])
                coords = [float(v) for v in fields[1:]]
            except ValueError:
                raise ParseError(f"{path} line {lineno}: malformed row") from None
            if not 1 <= letter <= k + 1:
                raise ParseError(f"{path} line {lineno}: letter {letter} outside 1..{k + 1}")
            buckets.setdefault(letter, []).append(coords)
    if not buckets:
        raise ParseError(f"{path}: no points")
    d = k + 1
    points = {
        i: np.asarray(buckets[i], dtype=float) if i in buckets else np.zeros((0, k))
        for i in range(1, d + 1)
    }
    return RauzyApprox(points=points, d=d, source="file", meta={"path": path})


def render_ppm(
    approx: RauzyApprox,
    width: int,
    height: int,
    colors: list[tuple[int, int, int]] | None = None,
    margin: float = 0.05,
    background: tuple[int, int, int] = (255, 255, 255),
) -> bytes:
    """Rasterize the cloud to a binary PPM.

    The point bounding box is fitted to the image with a fractional margin
    per axis (each axis scaled independently); a degenerate axis collapses to
    the image center.  Only the first two stable coordinates are drawn; a
    one-dimensional cloud sits on the horizontal midline.  Letters paint in
    ascending order, so later letters win overlapping pixels.
    """
    if width < 1 or height < 1:
        raise ValueError("image dimensions must be positive")
    union = approx.union()
    if len(union) == 0:
        raise DomainError("nothing to render: empty approximation")
    if union.shape[1] == 1:
        union = np.column_stack([union[:, 0], np.zeros(len(union))])
    xy = union[:, :2]
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    span = hi - lo
    pad = np.where(span > 0, span * margin, 1.0)
    lo = lo - pad
    span = span + 2 * pad
    raster = np.empty((height, width, 3), dtype=np.uint8)
    raster[:, :] = np.asarray(background, dtype=np.uint8)
    palette = colors if colors is not None else default_colors(approx.d)
    if len(palette) < approx.d:
        raise ValueError(f"need {approx.d} colors, got {len(palette)}")
    for letter in sorted(approx.points):
        pts = approx.points[letter]
        if not len(pts):
            continue
        if pts.shape[1] == 1:
            pts = np.column_stack([pts[:, 0], np.zeros(len(pts))])
        cols = np.clip(((pts[:, 0] - lo[0]) / span[0] * width).astype(int), 0, width - 1)
        rows = np.clip(((pts[:, 1] - lo[1]) / span[1] * height).astype(int), 0, height - 1)
        raster[height - 1 - rows, cols] = palette[letter - 1]
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    return header + raster.tobytes()
