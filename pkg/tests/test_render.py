import re

import pytest

from slopekit.render import RenderError, grid_figure, grid_svg, slopes_figure, tile_color, write_svg


def rects(svg: str) -> int:
    return len(re.findall(r"<rect ", svg))


def test_one_rect_per_cell():
    grid = [["Y"] * 8 for _ in range(8)]
    assert rects(grid_svg(grid)) == 64
    assert rects(grid_svg([["B"]])) == 1
    assert rects(grid_svg([["Y", None], [None, "B"]])) == 2


def test_svg_is_byte_stable(tmp_path):
    grid = [["Y", "B", "leftmost|joinL"], ["w:g0|fillR|yellow", "black|horiz", "T<1>"]]
    a = write_svg(grid, tmp_path / "a.svg", 5).read_bytes()
    b = write_svg(grid, tmp_path / "b.svg", 5).read_bytes()
    assert a == b
    assert b"T&lt;1&gt;" in a


def test_rows_are_drawn_bottom_up():
    svg = grid_svg([["Y"], ["B"]], 10)
    assert '<rect x="0" y="10" width="10" height="10" fill="#e8d44d"><title>Y</title>' in svg
    assert '<rect x="0" y="0" width="10" height="10" fill="#4d7be8"><title>B</title>' in svg


def test_colors():
    assert tile_color("Y") == "#e8d44d"
    assert tile_color("w:g0|fillL|blue") == tile_color("B")
    assert tile_color("some-tile") == tile_color("some-tile")
    assert re.fullmatch(r"#[0-9a-f]{6}", tile_color("cmpR[s0,1>h,1,R]"))


def test_bad_input():
    with pytest.raises(RenderError):
        grid_svg([["Y"]], 0)
    with pytest.raises(RenderError):
        grid_svg([])


def test_png_figures(tmp_path):
    g = grid_figure([["Y", "B"], ["B", None]], tmp_path / "g.png", "t")
    s = slopes_figure([(1, 0)], [(1, 1), (0, 1)], tmp_path / "s.png", "yb")
    for p in (g, s):
        data = p.read_bytes()
        assert data[:8] == b"\x89PNG\r\n\x1a\n"
    again = grid_figure([["Y", "B"], ["B", None]], tmp_path / "g2.png", "t")
    assert again.read_bytes() == g.read_bytes()
