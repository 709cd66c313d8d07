"""SVG and PNG pictures of patches, witnesses and slope reports.

Colors come from a fixed table for the fixture and construction tiles and
from a hash of the tile name otherwise, so output is byte-stable.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Sequence

FIXED = {
    "Y": "#e8d44d",
    "B": "#4d7be8",
    "W": "#f4f4f4",
}
ROLE_COLORS = {
    "black": "#222222",
    "leftmost": "#8c8c8c",
    "rightmost": "#8c8c8c",
    "betweenrl": "#b0b0b0",
    "betweenlr": "#b0b0b0",
    "junction": "#6e6e6e",
}
SQUARE_COLORS = {"yellow": "#e8d44d", "blue": "#4d7be8"}
HASH_PALETTE = (
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
    "#9a6324", "#fffac8", "#800000", "#aaffc3", "#808000", "#ffd8b1",
)
EMPTY = "#ffffff"

Grid = Sequence[Sequence[str | None]]


class RenderError(ValueError):
    pass


def tile_color(name: str) -> str:
    if name in FIXED:
        return FIXED[name]
    parts = name.split("|")
    # product tiles: role colors for the skeleton, square color for whites
    if parts[0] in ROLE_COLORS:
        return ROLE_COLORS[parts[0]]
    for p in parts:
        if p in SQUARE_COLORS:
            return SQUARE_COLORS[p]
    if parts[0].startswith("w:"):
        return "#f4f4f4"
    digest = hashlib.sha256(name.encode()).digest()
    return HASH_PALETTE[digest[0] % len(HASH_PALETTE)]


def grid_svg(grid: Grid, cell: int = 16) -> str:
    """One rect per occupied cell; grid rows are bottom first and drawn bottom up."""
    if cell < 1:
        raise RenderError("cell size must be at least 1")
    if not grid or not grid[0]:
        raise RenderError("nothing to draw")
    h, w = len(grid), len(grid[0])
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * cell}" height="{h * cell}" '
        f'viewBox="0 0 {w * cell} {h * cell}">',
    ]
    for y, row in enumerate(grid):
        top = (h - 1 - y) * cell
        for x, name in enumerate(row):
            if name is None:
                continue
            out.append(f'<rect x="{x * cell}" y="{top}" width="{cell}" height="{cell}" '
                       f'fill="{tile_color(name)}"><title>{_escape(name)}</title></rect>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def write_svg(grid: Grid, path: str | Path, cell: int = 16) -> Path:
    doc = grid_svg(grid, cell)
    p = Path(path)
    try:
        p.write_text(doc, encoding="utf-8")
    except OSError as e:
        raise RenderError(f"cannot write {p}: {e.strerror}") from None
    return p


def _rgb(hex_color: str) -> tuple[float, float, float]:
    return tuple(int(hex_color[i:i + 2], 16) / 255 for i in (1, 3, 5))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path):
    # no timestamps in the metadata so reruns give identical files
    try:
        fig.savefig(path, dpi=100, metadata={"Software": None} if path.suffix == ".png" else None)
    except OSError as e:
        raise RenderError(f"cannot write {path}: {e.strerror}") from None


def grid_figure(grid: Grid, path: str | Path, title: str = "") -> Path:
    """Raster picture of a name grid."""
    plt = _pyplot()
    h, w = len(grid), len(grid[0])
    img = [[_rgb(tile_color(n) if n is not None else EMPTY) for n in row] for row in grid]
    fig, ax = plt.subplots(figsize=(max(2, w * 0.3), max(2, h * 0.3)))
    ax.imshow(img, origin="lower", interpolation="nearest")
    ax.set_xticks([])
    ax.set_yticks([])
    if title:
        ax.set_title(title, fontsize=9)
    p = Path(path)
    _save(fig, p)
    plt.close(fig)
    return p


def slopes_figure(found: Sequence[tuple[int, int]], tried: Sequence[tuple[int, int]], path: str | Path,
                  title: str = "") -> Path:
    """Rays for each probed direction, found ones drawn solid."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 4))
    for p, q in tried:
        ax.plot([0, p], [0, q], color="#cccccc", linewidth=0.8)
    for p, q in found:
        ax.plot([-p, p], [-q, q], color="#4d7be8", linewidth=2)
    ax.set_aspect("equal")
    ax.axhline(0, color="#888888", linewidth=0.5)
    ax.axvline(0, color="#888888", linewidth=0.5)
    if title:
        ax.set_title(title, fontsize=9)
    p = Path(path)
    _save(fig, p)
    plt.close(fig)
    return p
