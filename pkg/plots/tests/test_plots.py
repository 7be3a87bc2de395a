import hashlib

import pytest

from hcrv_plots import FigureSpec, SchemaMismatch, render
from hcrv_plots.cli import main

SCHEMA = "# hcrv-schema v1\n"


def _write(path, header, rows):
    lines = [SCHEMA.rstrip("\n"), header] + rows
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture()
def bench_csv(tmp_path):
    rows = []
    for cell, n in ((0, 10), (1, 40)):
        for sampler, cost in (("mhlog", 0.01), ("hdppr", 0.02)):
            for rep in range(3):
                rows.append(f"{cell},{sampler},4,{n},8,{rep},0.1,"
                            f"1.0,200,{cost * n + 0.001 * rep}")
    return _write(tmp_path / "bench.csv",
                  "cell,sampler,d,n,k,replicate,setup_cpu_seconds,"
                  "cpu_seconds,ess,cpu_per_ess", rows)


@pytest.fixture()
def grid_csv(tmp_path):
    rows = []
    for s2 in (0.3, 0.5):
        for rho in (0.2, 0.6):
            rows.append(f"{s2},{rho},1.5,2.5,hcrv")
            rows.append(f"{s2},{rho},2.0,3.0,hdp")
    return _write(tmp_path / "grid.csv", "sigma2,rho,alpha,alpha0,model", rows)


@pytest.fixture()
def weights_csv(tmp_path):
    rows = []
    for draw in range(20):
        for g in range(2):
            rows.append(f"{draw},{g},{0.2 + 0.01 * g},{0.3},{0.5 - 0.01 * g}")
    return _write(tmp_path / "weights.csv", "draw,group,w_0,w_1,residual",
                  rows)


@pytest.fixture()
def chain_csv(tmp_path):
    rows = [f"{i},{1.0 + 0.1 * (i % 7)},{2.0 + 0.05 * (i % 5)}"
            for i in range(50)]
    return _write(tmp_path / "chain.csv", "draw,scalar,lam", rows)


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.mark.parametrize("kind,fixture", [
    ("bench", "bench_csv"), ("heat", "grid_csv"), ("borrow", "weights_csv"),
    ("density", "chain_csv"), ("trace", "chain_csv"),
])
def test_each_kind_renders_and_is_read_only(tmp_path, request, kind, fixture):
    src = request.getfixturevalue(fixture)
    before = _digest(src)
    out = tmp_path / f"{kind}.png"
    render(FigureSpec(inputs=[src], kind=kind, out=out))
    assert out.exists() and out.stat().st_size > 0
    assert _digest(src) == before


def test_density_overlays_multiple_inputs(tmp_path, chain_csv):
    other = tmp_path / "other" / "chain.csv"
    other.parent.mkdir()
    other.write_text(chain_csv.read_text())
    out = tmp_path / "overlay.png"
    render(FigureSpec(inputs=[chain_csv, other], kind="density", out=out))
    assert out.exists()


def test_empty_file_raises(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaMismatch):
        render(FigureSpec(inputs=[path], kind="trace",
                          out=tmp_path / "x.png"))


def test_missing_schema_header_raises(tmp_path):
    path = tmp_path / "raw.csv"
    path.write_text("draw,scalar\n0,1.0\n")
    with pytest.raises(SchemaMismatch, match="hcrv-schema"):
        render(FigureSpec(inputs=[path], kind="trace",
                          out=tmp_path / "x.png"))


def test_missing_column_is_named(tmp_path, grid_csv):
    with pytest.raises(SchemaMismatch, match="missing column 'n'"):
        render(FigureSpec(inputs=[grid_csv], kind="bench",
                          out=tmp_path / "x.png"))


def test_missing_file_raises(tmp_path):
    with pytest.raises(SchemaMismatch, match="not found"):
        render(FigureSpec(inputs=[tmp_path / "nope.csv"], kind="bench",
                          out=tmp_path / "x.png"))


def test_unknown_kind_rejected(tmp_path, chain_csv):
    with pytest.raises(SchemaMismatch, match="kind"):
        FigureSpec(inputs=[chain_csv], kind="pie", out=tmp_path / "x.png")


def test_cli_renders(tmp_path, bench_csv, capsys):
    out = tmp_path / "cli.png"
    assert main(["bench", "--in", str(bench_csv), "--out", str(out)]) == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_cli_reports_schema_errors(tmp_path, capsys):
    path = tmp_path / "raw.csv"
    path.write_text("x\n1\n")
    code = main(["trace", "--in", str(path), "--out", str(tmp_path / "x.png")])
    assert code == 2
    assert "error:" in capsys.readouterr().err
