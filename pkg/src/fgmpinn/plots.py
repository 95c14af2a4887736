"""Self-contained SVG charts: line plots, mean/std bands and node-colour maps."""
from __future__ import annotations

from html import escape
from pathlib import Path

import numpy as np

W, H = 640, 420
MARGIN = dict(left=70, right=20, top=40, bottom=50)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _scale(lo, hi, a, b):
    if hi == lo:
        hi = lo + 1.0
    return lambda v: a + (np.asarray(v, dtype=float) - lo) * (b - a) / (hi - lo)


def _frame(title, xlabel, ylabel, xr, yr) -> list[str]:
    x0, x1 = MARGIN["left"], W - MARGIN["right"]
    y0, y1 = H - MARGIN["bottom"], MARGIN["top"]
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        f'<text x="{(x0 + x1) / 2}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2}" text-anchor="middle" transform="rotate(-90 16 {(y0 + y1) / 2})">{escape(ylabel)}</text>',
    ]
    sx = _scale(*xr, x0, x1)
    sy = _scale(*yr, y0, y1)
    for v in np.linspace(*xr, 5):
        out.append(f'<text x="{float(sx(v)):.1f}" y="{y0 + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in np.linspace(*yr, 5):
        out.append(f'<text x="{x0 - 6}" y="{float(sy(v)) + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return out


def _range(arrays) -> tuple[float, float]:
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    return (lo - 0.5, hi + 0.5) if lo == hi else (lo, hi)


def _polyline(xs, ys, sx, sy, color, dash=False) -> str:
    pts = " ".join(f"{float(a):.2f},{float(b):.2f}" for a, b in zip(sx(xs), sy(ys)) if np.isfinite(b))
    extra = ' stroke-dasharray="6 4"' if dash else ""
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>'


def _legend(names) -> list[str]:
    out = []
    for i, name in enumerate(names):
        y = MARGIN["top"] + 6 + 16 * i
        x = W - MARGIN["right"] - 150
        out.append(f'<rect x="{x}" y="{y}" width="12" height="3" fill="{PALETTE[i % len(PALETTE)]}"/>')
        out.append(f'<text x="{x + 18}" y="{y + 5}">{escape(name)}</text>')
    return out


def line_chart(path, series: dict[str, tuple], title="", xlabel="", ylabel="") -> None:
    """``series`` maps a label to (x, y) arrays; labels ending in "ref" are dashed."""
    xr = _range([s[0] for s in series.values()])
    yr = _range([s[1] for s in series.values()])
    out = _frame(title, xlabel, ylabel, xr, yr)
    sx = _scale(*xr, MARGIN["left"], W - MARGIN["right"])
    sy = _scale(*yr, H - MARGIN["bottom"], MARGIN["top"])
    for i, (name, (xs, ys)) in enumerate(series.items()):
        order = np.argsort(np.asarray(xs))
        out.append(_polyline(np.asarray(xs)[order], np.asarray(ys)[order], sx, sy,
                             PALETTE[i % len(PALETTE)], dash=name.endswith("ref")))
    out += _legend(series)
    out.append("</svg>")
    Path(path).write_text("\n".join(out))


def band_chart(path, bands: dict[str, tuple], title="", xlabel="epoch", ylabel="") -> None:
    """``bands`` maps a label to (x, mean, std); draws mean lines with +-std shading."""
    xr = _range([b[0] for b in bands.values()])
    yr = _range([np.asarray(b[1]) + s * np.asarray(b[2]) for b in bands.values() for s in (-1, 1)])
    out = _frame(title, xlabel, ylabel, xr, yr)
    sx = _scale(*xr, MARGIN["left"], W - MARGIN["right"])
    sy = _scale(*yr, H - MARGIN["bottom"], MARGIN["top"])
    for i, (name, (xs, mu, sd)) in enumerate(bands.items()):
        xs, mu, sd = (np.asarray(a, dtype=float) for a in (xs, mu, sd))
        color = PALETTE[i % len(PALETTE)]
        upper = [f"{float(a):.2f},{float(b):.2f}" for a, b in zip(sx(xs), sy(mu + sd))]
        lower = [f"{float(a):.2f},{float(b):.2f}" for a, b in zip(sx(xs[::-1]), sy((mu - sd)[::-1]))]
        out.append(f'<polygon points="{" ".join(upper + lower)}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        out.append(_polyline(xs, mu, sx, sy, color))
    out += _legend(bands)
    out.append("</svg>")
    Path(path).write_text("\n".join(out))


def _colour(t: float) -> str:
    # blue -> white -> red
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        a = t / 0.5
        r, g, b = 59 + a * (255 - 59), 76 + a * (255 - 76), 192 + a * (255 - 192)
    else:
        a = (t - 0.5) / 0.5
        r, g, b = 255 - a * (255 - 180), 255 - a * 255, 255 - a * (255 - 38)
    return f"#{int(r):02x}{int(g):02x}{int(b):02x}"


def node_map(path, points, values, title="", vrange=None) -> None:
    """Colour each 2D node by its value; the plot keeps the geometry's aspect ratio."""
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    lo, hi = vrange if vrange is not None else _range([vals])
    xr = (pts[:, 0].min(), pts[:, 0].max())
    yr = (pts[:, 1].min(), pts[:, 1].max())
    span = max(xr[1] - xr[0], yr[1] - yr[0]) or 1.0
    size = H - MARGIN["top"] - MARGIN["bottom"]
    px = size / span
    r = max(1.0, 0.5 * px * np.sqrt((xr[1] - xr[0] + 1e-12) * (yr[1] - yr[0] + 1e-12) / len(pts)))
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
        f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x0, y0 = MARGIN["left"], H - MARGIN["bottom"]
    for (x, y), v in zip(pts, vals):
        t = 0.5 if hi == lo else (v - lo) / (hi - lo)
        out.append(f'<circle cx="{x0 + (x - xr[0]) * px:.2f}" cy="{y0 - (y - yr[0]) * px:.2f}" r="{r:.2f}" fill="{_colour(t)}"/>')
    # colour bar
    bx = W - MARGIN["right"] - 30
    for k in range(50):
        t = k / 49
        y = y0 - t * size
        out.append(f'<rect x="{bx}" y="{y - size / 50:.2f}" width="14" height="{size / 50 + 0.5:.2f}" fill="{_colour(t)}"/>')
    out.append(f'<text x="{bx - 4}" y="{y0}" text-anchor="end">{lo:.3g}</text>')
    out.append(f'<text x="{bx - 4}" y="{y0 - size + 10}" text-anchor="end">{hi:.3g}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out))
