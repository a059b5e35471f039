"""Gradient-norm plots as hand-written SVG.

Output depends only on the input numbers (fixed formatting, no timestamps or
random ids), so identical traces give byte-identical files.
"""

import math
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 170, 30, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _series(trace):
    if hasattr(trace, "records"):
        return [(r.k, r.gradnorm) for r in trace.records]
    return list(trace)


def _fmt(v):
    return f"{v:.2f}"


def render_svg(traces, labels=None, title="gradient norm"):
    series = [_series(t) for t in traces]
    if not series:
        raise ValueError("need at least one trace")
    labels = list(labels) if labels is not None else [f"trace {i}" for i in range(len(series))]
    positive = [v for s in series for _, v in s if v > 0 and math.isfinite(v)]
    lo = math.floor(math.log10(min(positive))) if positive else -1
    hi = math.ceil(math.log10(max(positive))) if positive else 1
    if hi <= lo:
        lo, hi = lo - 1, hi + 1
    kmax = max((k for s in series for k, _ in s), default=0) or 1
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(k):
        return LEFT + pw * k / kmax

    def py(v):
        lv = math.log10(v) if v > 0 and math.isfinite(v) else lo
        lv = min(max(lv, lo), hi)
        return TOP + ph * (hi - lv) / (hi - lo)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<title>{escape(title)}</title>',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>',
    ]
    step = max(1, math.ceil((hi - lo) / 10))
    for e in range(lo, hi + 1, step):
        y = _fmt(TOP + ph * (hi - e) / (hi - lo))
        out.append(f'<line class="tick" x1="{LEFT - 4}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">1e{e}</text>')
    for i in range(6):
        k = round(kmax * i / 5)
        x = _fmt(px(k))
        out.append(f'<line class="tick" x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + ph + 16}" text-anchor="middle">{k}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 10}" text-anchor="middle">iteration</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.2f})">{escape(title)}</text>')
    for i, (s, label) in enumerate(zip(series, labels)):
        color = COLORS[i % len(COLORS)]
        pts = [f"{_fmt(px(k))},{_fmt(py(v))}" for k, v in s]
        d = "M" + " L".join(pts) if pts else ""
        out.append(f'<path class="trace" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 10 + 18 * i
        lx = LEFT + pw + 12
        out.append(f'<line class="legend-key" x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text class="legend" x="{lx + 26}" y="{ly}" dominant-baseline="middle">'
                   f'{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(traces, path, labels=None, title="gradient norm"):
    """Write an SVG overlaying the gradient-norm curves of ``traces``
    (IterTrace objects or (k, value) sequences) on a log scale."""
    path = Path(path)
    path.write_text(render_svg(traces, labels, title), newline="")
    return path
