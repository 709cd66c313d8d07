"""Small reference systems used by tests and the CLI."""

from .core import Pattern, Tile, TilingSystem

Y, B = 0, 1


def yb_system() -> TilingSystem:
    """Yellow/blue system: rows are monochrome and blue never sits under yellow.

    Its valid tilings are all-yellow, all-blue, or yellow below a horizontal
    cut with blue above, so every non-biperiodic tiling has slope 0.
    """
    forbid = [
        Pattern.from_dict({(0, 0): Y, (1, 0): B}),
        Pattern.from_dict({(0, 0): B, (1, 0): Y}),
        Pattern.from_dict({(0, 0): B, (0, 1): Y}),
    ]
    return TilingSystem([Tile(Y, "Y"), Tile(B, "B")], forbid, name="yb")


def single_tile_system() -> TilingSystem:
    return TilingSystem([Tile(0, "W")], name="single")


def free_system(n: int = 2) -> TilingSystem:
    """n tiles, no rules."""
    return TilingSystem([Tile(i, f"T{i}") for i in range(n)], name=f"free{n}")
