import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest

from irgd import Diminishing, SphereRayleigh, TraceFormatError, emit_plot, read_trace, run_irgdr, write_trace
from irgd.cli import golden_trace
from irgd.plotting import render_svg
from irgd.solvers import IterRecord, IterTrace
from irgd.tracefile import TRACE_HEADER, audit_path, trace_csv_text

DATA = Path(__file__).parent / "data"
SVG = "{http://www.w3.org/2000/svg}"


def _trace(values):
    return IterTrace(records=[IterRecord(k=i, t=0.1, f=0.0, gradnorm=v, errbound=0.0, evals=i, wall_s=0.0)
                              for i, v in enumerate(values)])


# -- trace CSV --------------------------------------------------------------------


def test_trace_csv_schema(tmp_path):
    tr = golden_trace()
    p = write_trace(tr, tmp_path / "t.csv")
    raw = p.read_bytes()
    assert raw.splitlines()[0] == b"k,t,f,gradnorm,errbound,evals,wall_s"
    assert b"\r" not in raw
    assert len(raw.splitlines()) == len(tr.records) + 1
    assert audit_path(p).read_text().splitlines()[0] == "k,kind,gnorm,err,inner"


def test_trace_roundtrip_exact(tmp_path):
    prob = SphereRayleigh([3.0, 1.0, 1.0])
    tr = run_irgdr(prob, prob.manifold.random_point(np.random.default_rng(0)), Diminishing(0.75), 0.3,
                   rng=np.random.default_rng(1))
    back = read_trace(write_trace(tr, tmp_path / "r.csv"))
    for a, b in zip(tr.records, back.records):
        for name in ("k", "t", "f", "gradnorm", "errbound", "evals", "kind", "gnorm", "err", "inner"):
            assert getattr(a, name) == getattr(b, name)
        assert b.wall_s == 0.0
    assert back.audited


def test_trace_timing_is_opt_in(tmp_path):
    tr = _trace([1.0, 0.5])
    tr.records[1] = IterRecord(k=1, t=0.0, f=0.0, gradnorm=0.5, errbound=0.0, evals=1, wall_s=1.25)
    assert trace_csv_text(tr).splitlines()[2].endswith(",0.0")
    assert trace_csv_text(tr, timing=True).splitlines()[2].endswith(",1.25")


def test_trace_without_sidecar_is_unaudited(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text(trace_csv_text(_trace([1.0, 0.1])))
    assert not read_trace(p).audited


def test_malformed_traces(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(TraceFormatError, match="header"):
        read_trace(p)
    p.write_text(",".join(TRACE_HEADER) + "\n0,x,1,1,0,1,0\n")
    with pytest.raises(TraceFormatError, match="malformed"):
        read_trace(p)


def test_golden_trace_matches_committed_file():
    tr = golden_trace()
    assert trace_csv_text(tr) == (DATA / "golden-trace.csv").read_text()
    assert read_trace(DATA / "golden-trace.csv").final.f == tr.final.f


# -- SVG --------------------------------------------------------------------------


def test_constant_trace_draws_horizontal_line(tmp_path):
    p = emit_plot([_trace([0.3] * 5)], tmp_path / "c.svg", ["flat"])
    root = ET.parse(p).getroot()
    (path,) = root.iter(SVG + "path")
    ys = {pt.split(",")[1] for pt in path.get("d")[1:].split(" L")}
    assert len(ys) == 1


def test_two_traces_two_paths_two_legend_entries(tmp_path):
    p = emit_plot([_trace([1, 0.1, 0.01]), _trace([1, 0.5])], tmp_path / "two.svg", ["a", "b"])
    root = ET.parse(p).getroot()
    assert len(list(root.iter(SVG + "path"))) == 2
    legend = [t.text for t in root.iter(SVG + "text") if t.get("class") == "legend"]
    assert legend == ["a", "b"]
    assert any(l.get("class") == "axis" for l in root.iter(SVG + "line"))


def test_plot_is_byte_deterministic_and_escapes_labels():
    a = render_svg([_trace([1, 1e-3, 1e-7])], ["<RGD & co>"])
    b = render_svg([_trace([1, 1e-3, 1e-7])], ["<RGD & co>"])
    assert a == b
    ET.fromstring(a)
    assert "&lt;RGD &amp; co&gt;" in a


def test_plot_handles_zero_and_single_point():
    ET.fromstring(render_svg([_trace([0.0])]))
    ET.fromstring(render_svg([_trace([1.0, 0.0, 1e-3])]))


def test_plot_needs_a_trace():
    with pytest.raises(ValueError):
        render_svg([])


def test_golden_plot_matches_committed_file():
    assert render_svg([golden_trace()], ["RGD diminishing"]) == (DATA / "golden-plot.svg").read_text()
