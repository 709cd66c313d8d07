"""Command-line front end.

Exit codes: 0 when the analysis ran (whatever its answer), 1 for bad
input, 2 when a search budget ran out.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .construction import AlphabetTooLarge, ConstructionError, LAYER_ORDER, assemble_tau, placeholder_background
from .core import PeriodVector, TilingError, validate_patch
from .io import (
    ParseError,
    dump_patch,
    dump_tileset,
    dump_wang,
    dump_witness,
    grid_from_file,
    load_tileset,
    load_tm,
    parse_patch,
)
from .machine import MachineError, run_tm
from .periodicity import DEFAULT_NODE_BUDGET, BudgetExceeded, Kind, decide_periodic, realize_witness_patch
from .render import RenderError, grid_figure, slopes_figure, write_svg
from .search import SearchBudgetExceeded
from .slopes import enumerate_slopes
from .tmtiles import RectangleInstance, compile_tm, rectangle_tileable

EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2
BUDGET_ENV = "SLOPEKIT_BUDGET"
KIND_LABEL = {Kind.DIRECTION_ONLY: "DIRECTION-ONLY", Kind.BIPERIODIC_ONLY: "BIPERIODIC-ONLY"}


class InputError(Exception):
    pass


def _budget(args) -> int:
    if args.budget is not None:
        value = args.budget
    elif os.environ.get(BUDGET_ENV):
        try:
            value = int(os.environ[BUDGET_ENV])
        except ValueError:
            raise InputError(f"{BUDGET_ENV} must be an integer") from None
    else:
        value = DEFAULT_NODE_BUDGET
    if value < 1:
        raise InputError("budget must be positive")
    return value


def _grid(system, patch):
    names = [t.name for t in system.tiles]
    x0, y0, x1, y1 = patch.bbox()
    d = patch.as_dict()
    return [[names[d[(x, y)]] if (x, y) in d else None for x in range(x0, x1 + 1)] for y in range(y0, y1 + 1)]


def _write(path: str, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror}") from None


def cmd_validate(args, out) -> int:
    system = load_tileset(args.tileset)
    print(f"tiles={len(system)} rules={system.rule_count()} k={system.k}", file=out)
    if args.patch:
        patch = parse_patch(system, Path(args.patch).read_text(encoding="utf-8"), args.patch)
        bad = validate_patch(system, patch)
        if not bad:
            print("VALID", file=out)
        else:
            print(f"INVALID {len(bad)}", file=out)
            names = [t.name for t in system.tiles]
            for v in bad:
                cells = " ".join(f"({x},{y})={names[t]}" for (x, y), t in v.pattern.cells)
                print(f"at ({v.offset[0]},{v.offset[1]}): {cells}", file=out)
    return EXIT_OK


def cmd_periodic(args, out) -> int:
    system = load_tileset(args.tileset)
    if (args.p, args.q) == (0, 0):
        raise InputError("period vector must be nonzero")
    w = decide_periodic(system, PeriodVector(args.p, args.q), _budget(args))
    if w is None:
        print("NONE", file=out)
        return EXIT_OK
    print(KIND_LABEL[w.kind], file=out)
    print(f"vector=({w.vector.p},{w.vector.q}) k={w.k} height={w.height}", file=out)
    print("cycle_a=" + ",".join(map(str, w.cycle_a)), file=out)
    print("connector=" + ",".join(map(str, w.connector)), file=out)
    print("cycle_b=" + ",".join(map(str, w.cycle_b)), file=out)
    width, height = args.window
    patch = realize_witness_patch(system, w, width, height, (0, -height // 2))
    grid = _grid(system, patch)
    for row in reversed(grid):
        print(" ".join(row), file=out)
    if args.witness_out:
        _write(args.witness_out, dump_witness(system, w, patch))
    if args.figure:
        grid_figure(grid, args.figure, f"{KIND_LABEL[w.kind]} ({w.vector.p},{w.vector.q})")
    return EXIT_OK


def cmd_slopes(args, out) -> int:
    system = load_tileset(args.tileset)
    if args.slope_bound < 1 or args.multiple_bound < 1:
        raise InputError("bounds must be at least 1")
    report = enumerate_slopes(system, args.multiple_bound, args.slope_bound, _budget(args))
    for line in report.lines():
        print(line, file=out)
    if args.json:
        _write(args.json, report.to_json() + "\n")
    if args.figure:
        found = [(w.vector.p, w.vector.q) for _, w in report.found]
        tried = [(s.direction().p, s.direction().q) for s in report.exhausted + report.unknown]
        slopes_figure(found, tried, args.figure, system.name)
    return EXIT_OK if not report.unknown else EXIT_BUDGET


def cmd_compile_tm(args, out) -> int:
    machine = load_tm(args.machine)
    tiles = compile_tm(machine)
    text = dump_wang(tiles, machine.name or "tm", [f"compiled from {Path(args.machine).name}",
                                                   f"tiles {len(tiles)}"])
    if args.output:
        _write(args.output, text)
        print(f"tiles={len(tiles)}", file=out)
    else:
        out.write(text)
    return EXIT_OK


def cmd_rect(args, out) -> int:
    machine = load_tm(args.machine)
    word = tuple(args.input)
    if args.width < 1 or args.time < 1:
        raise InputError("width and time must be positive")
    run = run_tm(machine, word, max_time=args.time - 1, max_space=args.width)
    print(f"RUN halted={str(run.halted).lower()} time={run.time} reason={run.reason}", file=out)
    if len(word) > args.width:
        print("NOT-TILEABLE", file=out)
        return EXIT_OK
    tiles = compile_tm(machine)
    fill = rectangle_tileable(tiles, RectangleInstance.of(args.width, args.time, word, machine.blank),
                              _budget(args))
    if fill is None:
        print("NOT-TILEABLE", file=out)
        return EXIT_OK
    print("TILEABLE", file=out)
    d = fill.as_dict()
    for y in range(args.time - 1, -1, -1):
        print(" ".join(tiles[d[(x, y)]].name for x in range(args.width + 2)), file=out)
    return EXIT_OK


def cmd_construct(args, out) -> int:
    machine = load_tm(args.machine) if args.machine else None
    layers = tuple(args.layers.split(","))
    bg = placeholder_background(args.background)
    system = assemble_tau(machine, bg, layers, junctions=args.junctions, max_tiles=args.max_tiles)
    m = system.meta
    stats = f"layers={','.join(m['layers'])} tiles={m['tiles']} rules={m['rules']}"
    comments = [
        f"machine {m['machine'] or '-'}",
        f"background {m['background']}",
        stats,
    ] + [f"rules[{k}] {v}" for k, v in m["per_layer_rules"].items()]
    if args.output:
        _write(args.output, dump_tileset(system, comments))
    print(stats, file=out)
    return EXIT_OK


def cmd_render(args, out) -> int:
    if args.cell < 1:
        raise InputError("cell size must be at least 1")
    text = Path(args.input).read_text(encoding="utf-8")
    _, grid = grid_from_file(text, args.input)
    write_svg(grid, args.output, args.cell)
    cells = sum(1 for row in grid for c in row if c is not None)
    print(f"rects={cells}", file=out)
    return EXIT_OK


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected WxH") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("window sides must be positive")
    return a, b


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slopekit", description="Directions of periodicity of tilings.")
    sub = ap.add_subparsers(dest="verb", required=True)

    def with_budget(p):
        p.add_argument("--budget", type=int, default=None,
                       help=f"node budget (default {DEFAULT_NODE_BUDGET}, or ${BUDGET_ENV})")
        return p

    p = sub.add_parser("validate", help="parse a tileset, optionally check a patch")
    p.add_argument("tileset")
    p.add_argument("--patch")
    p.set_defaults(run=cmd_validate)

    p = with_budget(sub.add_parser("periodic", help="decide periodicity along one vector"))
    p.add_argument("tileset")
    p.add_argument("p", type=int)
    p.add_argument("q", type=int)
    p.add_argument("--window", type=_pair, default=(8, 8), help="size of the printed window, WxH")
    p.add_argument("--witness-out")
    p.add_argument("--figure", help="PNG picture of the window")
    p.set_defaults(run=cmd_periodic)

    p = with_budget(sub.add_parser("slopes", help="search slopes up to a bound"))
    p.add_argument("tileset")
    p.add_argument("--slope-bound", type=int, default=2)
    p.add_argument("--multiple-bound", type=int, default=2)
    p.add_argument("--json", help="write the machine-readable report here")
    p.add_argument("--figure", help="PNG picture of the probed directions")
    p.set_defaults(run=cmd_slopes)

    p = sub.add_parser("compile-tm", help="Wang tiles for a machine")
    p.add_argument("machine")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_compile_tm)

    p = with_budget(sub.add_parser("rect", help="tile the framed rectangle for a run"))
    p.add_argument("machine")
    p.add_argument("--width", type=int, required=True, help="tape cells between the borders")
    p.add_argument("--time", type=int, required=True, help="rectangle height")
    p.add_argument("--input", default="", help="input word, one letter per character")
    p.set_defaults(run=cmd_rect)

    p = sub.add_parser("construct", help="assemble the layered square construction")
    p.add_argument("machine", nargs="?")
    p.add_argument("--layers", default=",".join(LAYER_ORDER))
    p.add_argument("--background", type=int, choices=(1, 2), default=1, help="placeholder tile count")
    p.add_argument("--junctions", action="store_true")
    p.add_argument("--max-tiles", type=int, default=50_000)
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("render", help="SVG of a patch or a witness window")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--cell", type=int, default=16)
    p.set_defaults(run=cmd_render)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.run(args, out)
    except (BudgetExceeded, SearchBudgetExceeded, AlphabetTooLarge) as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, TilingError, MachineError, ConstructionError, RenderError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"error: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
