import io
import json
import subprocess
import sys

import pytest

from slopekit.cli import main
from slopekit.fixtures import single_tile_system, yb_system
from slopekit.io import dump_tileset, dump_tm
from slopekit.machine import parity_machine, right_scanner


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def files(tmp_path):
    (tmp_path / "yb.tiles").write_text(dump_tileset(yb_system()))
    (tmp_path / "yb_t.tiles").write_text(dump_tileset(yb_system().transpose()))
    (tmp_path / "one.tiles").write_text(dump_tileset(single_tile_system()))
    (tmp_path / "bad.tiles").write_text("slopekit-tileset v1\ntiles A\nforbid (0,0)=Q\n")
    (tmp_path / "scan.tm").write_text(dump_tm(right_scanner()))
    (tmp_path / "parity.tm").write_text(dump_tm(parity_machine()))
    return tmp_path


def test_validate(files, capsys):
    code, out = run("validate", files / "yb.tiles")
    assert code == 0 and out == "tiles=2 rules=3 k=3\n"
    code, _ = run("validate", files / "bad.tiles")
    assert code == 1
    assert "bad.tiles:line 3:" in capsys.readouterr().err


def test_validate_patch(files):
    (files / "p.txt").write_text("slopekit-patch v1\norigin 0 0\nB B\nY Y\n")
    assert run("validate", files / "yb.tiles", "--patch", files / "p.txt") == (0, "tiles=2 rules=3 k=3\nVALID\n")
    (files / "q.txt").write_text("slopekit-patch v1\norigin 0 0\nY Y\nB B\n")
    code, out = run("validate", files / "yb.tiles", "--patch", files / "q.txt")
    assert code == 0 and "INVALID 2" in out


def test_periodic(files):
    code, out = run("periodic", files / "yb.tiles", 1, 0, "--window", "3x12")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "DIRECTION-ONLY"
    # the walk switches from Y to B at block 1, i.e. row 3; rows print top first
    assert lines[-12:] == ["B B B"] * 3 + ["Y Y Y"] * 9
    code, out = run("periodic", files / "one.tiles", 2, 1)
    assert code == 0 and out.startswith("BIPERIODIC-ONLY")
    assert run("periodic", files / "yb.tiles", 0, 0)[0] == 1


def test_periodic_writes_witness_and_figure(files):
    w = files / "w.json"
    png = files / "w.png"
    code, _ = run("periodic", files / "yb.tiles", 1, 0, "--witness-out", w, "--figure", png)
    assert code == 0
    assert json.loads(w.read_text())["kind"] == "direction-only"
    assert png.read_bytes()[:4] == b"\x89PNG"
    svg = files / "w.svg"
    code, out = run("render", w, svg)
    assert code == 0 and out == "rects=64\n"
    assert svg.read_text().count("<rect ") == 64
    assert run("render", w, svg, "--cell", 0)[0] == 1


def test_slopes(files):
    code, out = run("slopes", files / "yb.tiles", "--json", files / "s.json")
    found = [ln for ln in out.splitlines() if "FOUND" in ln]
    assert code == 0 and found == ["SLOPE 0/1 FOUND vector=(1,0)"]
    assert json.loads((files / "s.json").read_text())["found"][0]["slope"] == "0/1"
    code, out = run("slopes", files / "yb_t.tiles")
    assert [ln for ln in out.splitlines() if "FOUND" in ln] == ["SLOPE inf FOUND vector=(0,1)"]
    code, out = run("slopes", files / "one.tiles")
    assert code == 0 and "FOUND" not in out


def test_budget_exit_code(files, monkeypatch):
    assert run("slopes", files / "yb.tiles", "--budget", 2)[0] == 2
    monkeypatch.setenv("SLOPEKIT_BUDGET", "2")
    assert run("periodic", files / "yb.tiles", 1, 0)[0] == 2
    monkeypatch.setenv("SLOPEKIT_BUDGET", "lots")
    assert run("periodic", files / "yb.tiles", 1, 0)[0] == 1


def test_compile_and_rect(files):
    code, out = run("compile-tm", files / "scan.tm", "-o", files / "scan.tiles")
    assert code == 0 and out.startswith("tiles=")
    assert run("validate", files / "scan.tiles")[0] == 0
    code, out = run("rect", files / "scan.tm", "--width", 3, "--time", 4, "--input", "11")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "RUN halted=true time=3 reason=halt" and lines[1] == "TILEABLE"
    assert len(lines) == 2 + 4
    code, out = run("rect", files / "parity.tm", "--width", 3, "--time", 4, "--input", "1")
    assert code == 0 and out.splitlines()[1] == "NOT-TILEABLE"


def test_construct(files):
    code, out = run("construct", "--layers", "C,R,A", "-o", files / "c.tiles")
    assert code == 0 and out.startswith("layers=C,R,A tiles=")
    assert run("validate", files / "c.tiles")[0] == 0
    assert run("construct", files / "scan.tm", "--max-tiles", 10)[0] == 2
    assert run("construct", "--layers", "C,P_TM")[0] == 1


def test_usage_errors(files):
    assert run()[0] == 1
    assert run("periodic", files / "yb.tiles", "x", 0)[0] == 1
    assert run("validate", files / "missing.tiles")[0] == 1


def test_module_entry_point(files):
    r = subprocess.run([sys.executable, "-m", "slopekit", "validate", str(files / "yb.tiles")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "tiles=2 rules=3 k=3\n"
