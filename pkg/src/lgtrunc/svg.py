"""Dependency-free SVG line plots with optional logarithmic axes."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
MARGIN = {"left": 78, "right": 170, "top": 40, "bottom": 56}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
           "#7f7f7f", "#bcbd22")


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / max(target, 1)
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


class _Axis:
    def __init__(self, values, log: bool, lo_px: float, hi_px: float):
        self.log = log
        vals = [v for v in values if math.isfinite(v) and (v > 0 or not log)]
        if not vals:
            vals = [1.0] if log else [0.0]
        if log:
            lo, hi = math.floor(math.log10(min(vals))), math.ceil(math.log10(max(vals)))
            if lo == hi:
                lo, hi = lo - 1, hi + 1
        else:
            lo, hi = min(vals), max(vals)
            if lo == hi:
                lo, hi = lo - 1, hi + 1
            step = _nice_step(hi - lo)
            lo, hi = math.floor(lo / step) * step, math.ceil(hi / step) * step
        self.lo, self.hi, self.lo_px, self.hi_px = lo, hi, lo_px, hi_px

    def usable(self, v: float) -> bool:
        return math.isfinite(v) and (v > 0 or not self.log)

    def __call__(self, v: float) -> float:
        u = math.log10(v) if self.log else v
        return self.lo_px + (u - self.lo) / (self.hi - self.lo) * (self.hi_px - self.lo_px)

    def ticks(self):
        if self.log:
            span = int(self.hi - self.lo)
            every = max(1, math.ceil(span / 8))
            return [(10.0**k, f"1e{k}") for k in range(int(self.lo), int(self.hi) + 1, every)]
        step = _nice_step(self.hi - self.lo)
        n = int(round((self.hi - self.lo) / step))
        return [(self.lo + i * step, f"{self.lo + i * step:g}") for i in range(n + 1)]


def render(plot) -> str:
    """SVG document for a :class:`lgtrunc.experiments.Plot`."""
    x0, x1 = MARGIN["left"], WIDTH - MARGIN["right"]
    y0, y1 = HEIGHT - MARGIN["bottom"], MARGIN["top"]
    xs = [float(v) for c in plot.curves for v in c.x]
    ys = [float(v) for c in plot.curves for v in c.y]
    ax, ay = _Axis(xs, plot.xlog, x0, x1), _Axis(ys, plot.ylog, y0, y1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{(x0 + x1) / 2:.1f}" y="22" text-anchor="middle" font-size="13">{escape(plot.title)}</text>',
           f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>']
    for v, label in ax.ticks():
        px = ax(v)
        out.append(f'<line x1="{px:.1f}" y1="{y0}" x2="{px:.1f}" y2="{y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.1f}" y="{y0 + 18}" text-anchor="middle">{escape(label)}</text>')
    for v, label in ay.ticks():
        py = ay(v)
        out.append(f'<line x1="{x0 - 5}" y1="{py:.1f}" x2="{x0}" y2="{py:.1f}" stroke="black"/>')
        out.append(f'<line x1="{x0}" y1="{py:.1f}" x2="{x1}" y2="{py:.1f}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{x0 - 8}" y="{py + 4:.1f}" text-anchor="end">{escape(label)}</text>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle">{escape(plot.xlabel)}</text>')
    out.append(f'<text x="18" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(y0 + y1) / 2:.1f})">{escape(plot.ylabel)}</text>')
    for i, c in enumerate(plot.curves):
        colour = PALETTE[i % len(PALETTE)]
        pts = [(ax(float(x)), ay(float(y))) for x, y in zip(c.x, c.y) if ax.usable(float(x)) and ay.usable(float(y))]
        dash = ' stroke-dasharray="6 4"' if c.dashed else ""
        if len(pts) > 1:
            path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pts)
            out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.6"{dash}/>')
        if len(pts) <= 40:
            out.extend(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="2.5" fill="{colour}"/>' for px, py in pts)
        ly = y1 + 8 + 16 * i
        out.append(f'<line x1="{x1 + 12}" y1="{ly}" x2="{x1 + 36}" y2="{ly}" stroke="{colour}" '
                   f'stroke-width="1.6"{dash}/>')
        out.append(f'<text x="{x1 + 42}" y="{ly + 4}">{escape(c.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
