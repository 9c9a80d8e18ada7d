"""Deterministic SVG portraits: Sigma by region, arcs by mode, special points."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import IoError
from .sigma import Region

SIZE = 800
MARGIN = 0.05

REGION_COLOR = {
    Region.SEWING: "#8c8c8c",
    Region.SLIDING: "#1f77b4",
    Region.ESCAPING: "#d62728",
}
MODE_COLOR = {"FlowX": "#2ca02c", "FlowY": "#9467bd", "Slide": "#ff7f0e"}


class _Frame:
    def __init__(self, K):
        self.K = K
        self.inner = SIZE * (1 - 2 * MARGIN)
        self.off = SIZE * MARGIN

    def __call__(self, x, y):
        xmin, xmax, ymin, ymax = self.K
        px = self.off + (x - xmin) / (xmax - xmin) * self.inner
        py = self.off + (ymax - y) / (ymax - ymin) * self.inner
        return px, py

    def path(self, pts) -> str:
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in (self(x, y) for x, y in pts))


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def render(sys, traj=None, lam=None, *, title: str = "") -> str:
    fr = _Frame(sys.K)
    xmin, xmax, ymin, ymax = sys.K
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>']
    if title:
        out.append(f'<title>{_esc(title)}</title>')
    (x0, y0), (x1, y1) = fr(xmin, ymax), fr(xmax, ymin)
    out.append(f'<rect x="{x0:.3f}" y="{y0:.3f}" width="{x1 - x0:.3f}" height="{y1 - y0:.3f}" '
               'fill="none" stroke="#cccccc" stroke-width="1"/>')
    if xmin < 0 < xmax:
        out.append(f'<polyline class="axis" points="{fr.path([(0, ymin), (0, ymax)])}" '
                   'fill="none" stroke="#dddddd" stroke-width="1"/>')
    if ymin < 0 < ymax:
        out.append(f'<polyline class="axis" points="{fr.path([(xmin, 0), (xmax, 0)])}" '
                   'fill="none" stroke="#dddddd" stroke-width="1"/>')
    if lam is not None:
        out.extend(_lambda(fr, lam))
    part = sys.partition
    for iv in part.intervals:
        pts = [sys.curve.point(s) for s in np.linspace(iv.lo, iv.hi, 48)]
        color = REGION_COLOR.get(iv.region, "#000000")
        out.append(f'<polyline class="sigma {iv.region.value}" points="{fr.path(pts)}" '
                   f'fill="none" stroke="{color}" stroke-width="4"/>')
    if traj is not None:
        for k, arc in enumerate(traj.arcs):
            pts = arc.samples[:, 1:]
            out.append(f'<polyline class="arc {arc.mode}" data-index="{k}" points="{fr.path(pts)}" '
                       f'fill="none" stroke="{MODE_COLOR.get(arc.mode, "#000000")}" stroke-width="1.2"/>')
    for b in part.breakpoints:
        rep = part.reports[b]
        if rep.region not in (Region.TANGENCY_X, Region.TANGENCY_Y, Region.DOUBLE):
            continue
        px, py = fr(*rep.point)
        label = f"{rep.region.value} ({_fmt(rep.point[0])}, {_fmt(rep.point[1])})"
        out.append(f'<circle class="tangency" cx="{px:.3f}" cy="{py:.3f}" r="5" fill="black"/>')
        out.append(f'<text x="{px + 8:.3f}" y="{py - 8:.3f}" font-size="12" '
                   f'font-family="monospace">{_esc(label)}</text>')
    for pe in part.pseudo_equilibria:
        px, py = fr(*pe.point)
        label = f"pseudo-eq ({_fmt(pe.point[0])}, {_fmt(pe.point[1])})"
        out.append(f'<rect class="pseudo-equilibrium" x="{px - 5:.3f}" y="{py - 5:.3f}" width="10" '
                   'height="10" fill="white" stroke="black" stroke-width="2"/>')
        out.append(f'<text x="{px + 8:.3f}" y="{py + 16:.3f}" font-size="12" '
                   f'font-family="monospace">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _lambda(fr, lam) -> list[str]:
    geoms = getattr(lam.polygon, "geoms", [lam.polygon])
    out = []
    for g in geoms:
        if g.geom_type != "Polygon":
            continue
        d = "M " + fr.path(list(g.exterior.coords)) + " Z"
        for ring in g.interiors:
            d += " M " + fr.path(list(ring.coords)) + " Z"
        out.append(f'<path class="lambda" d="{d}" fill="#ffbf00" fill-opacity="0.25" '
                   'fill-rule="evenodd" stroke="#b38600" stroke-width="1"/>')
    return out


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_svg(path, sys, traj=None, lam=None, *, title: str = "") -> str:
    text = render(sys, traj, lam, title=title)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e.strerror}") from None
    return text
