"""Serialization and rendering tests: CSV round trips and PPM rasters."""

import numpy as np
import pytest

from rauzy.core import DomainError, ParseError
from rauzy.emit import (
    default_colors,
    format_float,
    read_points_csv,
    render_ppm,
    write_points_csv,
)
from rauzy.fractal import RauzyApprox, hausdorff, project_prefixes
from rauzy.adic import DirectiveSequence

CONST_1 = DirectiveSequence.periodic((), (0,))


def test_format_float_round_trip():
    rng = np.random.default_rng(0)
    for x in rng.normal(size=50):
        assert float(format_float(float(x))) == float(x)
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(1.0) == "1"


def test_default_colors():
    pal = default_colors(3)
    assert pal == [(230, 57, 70), (69, 123, 157), (42, 157, 143)]
    wide = default_colors(6)
    assert len(wide) == 6
    assert len(set(wide)) == 6
    assert all(0 <= c <= 255 for rgb in wide for c in rgb)
    assert wide[:3] == pal


def test_csv_round_trip_bit_exact(tribo_set, tmp_path):
    approx = project_prefixes(CONST_1, tribo_set, 3000)
    path = str(tmp_path / "cloud.csv")
    write_points_csv(approx, path)
    back = read_points_csv(path)
    assert back.d == approx.d
    assert back.source == "file"
    for i in (1, 2, 3):
        assert np.array_equal(back.points[i], approx.points[i])
    assert hausdorff(back.union(), approx.union()).distance == 0.0


def test_csv_round_trip_preserves_empty_subtiles(tmp_path):
    approx = RauzyApprox(
        points={1: np.array([[0.5, -1.5]]), 2: np.zeros((0, 2)), 3: np.zeros((0, 2))},
        d=3,
        source="gifs",
    )
    path = str(tmp_path / "one.csv")
    write_points_csv(approx, path)
    back = read_points_csv(path)
    assert len(back.points[1]) == 1
    assert len(back.points[2]) == 0
    assert len(back.points[3]) == 0


def test_csv_write_deterministic(tribo_set, tmp_path):
    approx = project_prefixes(CONST_1, tribo_set, 500)
    p1, p2 = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
    write_points_csv(approx, p1)
    write_points_csv(approx, p2)
    assert open(p1, "rb").read() == open(p2, "rb").read()


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="ascii")
    return str(p)


def test_csv_read_rejects_bad_header(tmp_path):
    path = _write(tmp_path, "bad.csv", "foo,bar\n1,0.0\n")
    with pytest.raises(ParseError, match="not a points CSV"):
        read_points_csv(path)


def test_csv_read_reports_line_numbers(tmp_path):
    short = _write(tmp_path, "short.csv", "letter,x1,x2\n1,0.0\n")
    with pytest.raises(ParseError, match="line 2"):
        read_points_csv(short)
    garbled = _write(tmp_path, "garbled.csv", "letter,x1,x2\n1,0.0,0.0\n2,zero,0.0\n")
    with pytest.raises(ParseError, match="line 3: malformed"):
        read_points_csv(garbled)
    rogue = _write(tmp_path, "rogue.csv", "letter,x1,x2\n9,0.0,0.0\n")
    with pytest.raises(ParseError, match="letter 9 outside 1..3"):
        read_points_csv(rogue)


def test_csv_read_rejects_empty(tmp_path):
    path = _write(tmp_path, "empty.csv", "letter,x1,x2\n")
    with pytest.raises(ParseError, match="no points"):
        read_points_csv(path)


# ---------------------------------------------------------------------------
# rasterization


def _decode(data, width, height):
    header = f"P6\n{width} {height}\n255\n".encode("ascii")
    assert data[: len(header)] == header
    body = np.frombuffer(data[len(header):], dtype=np.uint8)
    return body.reshape(height, width, 3)


def test_render_header_and_size(tribo_set):
    approx = project_prefixes(CONST_1, tribo_set, 1000)
    data = render_ppm(approx, 120, 90)
    header = b"P6\n120 90\n255\n"
    assert data.startswith(header)
    assert len(data) == len(header) + 3 * 120 * 90


def test_render_single_point_hits_center():
    approx = RauzyApprox(
        points={1: np.array([[0.3, 0.7]]), 2: np.zeros((0, 2)), 3: np.zeros((0, 2))},
        d=3,
        source="gifs",
    )
    raster = _decode(render_ppm(approx, 64, 64), 64, 64)
    hits = np.argwhere((raster != 255).any(axis=2))
    assert len(hits) == 1
    row, col = hits[0]
    assert abs(col - 32) <= 1 and abs(row - 32) <= 1
    assert tuple(raster[row, col]) == (230, 57, 70)


def test_render_vertical_orientation():
    # the point with the larger second coordinate must land nearer the top
    approx = RauzyApprox(
        points={
            1: np.array([[0.0, 0.0]]),
            2: np.array([[0.0, 1.0]]),
            3: np.zeros((0, 2)),
        },
        d=3,
        source="gifs",
    )
    raster = _decode(render_ppm(approx, 32, 32, margin=0.1), 32, 32)
    rows_1 = np.argwhere((raster == (230, 57, 70)).all(axis=2))
    rows_2 = np.argwhere((raster == (69, 123, 157)).all(axis=2))
    assert len(rows_1) == 1 and len(rows_2) == 1
    assert rows_2[0][0] < rows_1[0][0]


def test_render_deterministic(tribo_set):
    approx = project_prefixes(CONST_1, tribo_set, 2000)
    assert render_ppm(approx, 100, 80) == render_ppm(approx, 100, 80)


def test_render_validation(tribo_set):
    approx = project_prefixes(CONST_1, tribo_set, 100)
    with pytest.raises(ValueError):
        render_ppm(approx, 0, 32)
    with pytest.raises(ValueError):
        render_ppm(approx, 32, 32, colors=[(0, 0, 0)])
    empty = RauzyApprox(
        points={i: np.zeros((0, 2)) for i in (1, 2, 3)}, d=3, source="gifs"
    )
    with pytest.raises(DomainError):
        render_ppm(empty, 32, 32)


def test_render_exactly_three_colors(tribo_set):
    approx = project_prefixes(CONST_1, tribo_set, 20_000)
    raster = _decode(render_ppm(approx, 200, 150), 200, 150)
    flat = raster.reshape(-1, 3)
    shades = {tuple(c) for c in np.unique(flat, axis=0)}
    shades.discard((255, 255, 255))
    assert shades == {(230, 57, 70), (69, 123, 157), (42, 157, 143)}
