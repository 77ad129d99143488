"""Serialise a ResultTable as CSV or as a standalone SVG figure."""
import io
import json
import math
from xml.sax.saxutils import escape

import numpy as np

from .report import COLUMNS, LABELS, ResultTable

WIDTH, HEIGHT = 800, 500
_PLOT = (70, 30, 770, 440)  # left, top, right, bottom
_INSET = (470, 45, 750, 205)
_COLORS = {
    "qf": "#000000",
    "sc": "#d62728",
    "w": "#2ca02c",
    "ms": "#1f77b4",
    "jn": "#ff7f0e",
    "expected": "#7f7f7f",
}


def _fmt(x):
    return f"{x:.17g}"


def _header_comments(table):
    meta = {k: v for k, v in table.metadata.items() if k != "peaks"}
    lines = ["# " + json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    peaks = table.metadata.get("peaks", {})
    if peaks:
        lines.append("# peaks " + json.dumps(peaks, sort_keys=True, separators=(",", ":")))
    return lines


def to_csv(table):
    """CSV text: '#' metadata lines, header ``tau,<columns>``, 17 significant digits."""
    names = table.names
    if not names:
        raise ValueError("table has no distribution columns")
    buf = io.StringIO()
    for line in _header_comments(table):
        buf.write(line + "\n")
    cols = ["tau"] + names
    buf.write(",".join(cols) + "\n")
    data = np.column_stack([np.asarray(table.columns[c], dtype=np.float64) for c in cols])
    for row in data:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def read_csv(text):
    """Inverse of :func:`to_csv` for the numeric columns; metadata is parsed back when present."""
    lines = text.splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith("# peaks "):
            meta["peaks"] = json.loads(line[len("# peaks "):])
        elif line.startswith("# "):
            meta.update(json.loads(line[2:]))
        elif line:
            body.append(line)
    header = body[0].split(",")
    if header[0] != "tau" or any(h not in COLUMNS for h in header[1:]):
        raise ValueError(f"unexpected header {body[0]!r}")
    values = np.array([[float(v) for v in row.split(",")] for row in body[1:]], dtype=np.float64)
    values = values.reshape(-1, len(header))
    cols = {h: values[:, i] for i, h in enumerate(header)}
    return ResultTable(cols, meta)


def _decimate(x, y, n_bins):
    """Keep first/min/max/last per bin so narrow peaks survive thinning."""
    if x.size <= 4 * n_bins:
        return x, y
    edges = np.linspace(0, x.size, n_bins + 1).astype(int)
    keep = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        seg = y[a:b]
        keep.extend((a, a + int(np.argmin(seg)), a + int(np.argmax(seg)), b - 1))
    idx = np.unique(keep)
    return x[idx], y[idx]


def _nice_ticks(lo, hi, n=5):
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _tick_label(v):
    return f"{v:.4g}"


class _Frame:
    def __init__(self, box, xlim, ylim):
        self.box = box
        self.xlim = xlim
        self.ylim = ylim

    def sx(self, x):
        l, _, r, _ = self.box
        return l + (x - self.xlim[0]) / (self.xlim[1] - self.xlim[0]) * (r - l)

    def sy(self, y):
        _, t, _, b = self.box
        return b - (y - self.ylim[0]) / (self.ylim[1] - self.ylim[0]) * (b - t)

    def polyline(self, x, y, color, clip, width=1.2):
        px, py = self.sx(x), self.sy(y)
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
        return (f'<polyline fill="none" stroke="{color}" stroke-width="{width}" '
                f'clip-path="url(#{clip})" points="{pts}"/>')

    def axes(self, xlabel=None, ylabel=None, font=12):
        l, t, r, b = self.box
        out = [f'<rect x="{l}" y="{t}" width="{r - l}" height="{b - t}" fill="white" stroke="black"/>']
        for xt in _nice_ticks(*self.xlim):
            X = self.sx(xt)
            out.append(f'<line x1="{X:.2f}" y1="{b}" x2="{X:.2f}" y2="{b + 4}" stroke="black"/>')
            out.append(f'<text x="{X:.2f}" y="{b + 4 + font}" font-size="{font - 2}" '
                       f'text-anchor="middle">{_tick_label(xt)}</text>')
        for yt in _nice_ticks(*self.ylim):
            Y = self.sy(yt)
            out.append(f'<line x1="{l - 4}" y1="{Y:.2f}" x2="{l}" y2="{Y:.2f}" stroke="black"/>')
            out.append(f'<text x="{l - 6}" y="{Y + 3:.2f}" font-size="{font - 2}" '
                       f'text-anchor="end">{_tick_label(yt)}</text>')
        if xlabel:
            out.append(f'<text x="{(l + r) / 2}" y="{b + 2 * font + 6}" font-size="{font + 2}" '
                       f'text-anchor="middle" font-style="italic">{xlabel}</text>')
        if ylabel:
            out.append(f'<text x="16" y="{(t + b) / 2}" font-size="{font + 2}" text-anchor="middle" '
                       f'font-style="italic" transform="rotate(-90 16 {(t + b) / 2})">{ylabel}</text>')
        return out


def _sc_window(tau, sc):
    """tau range holding the bulk of the semiclassical curve."""
    mass = np.cumsum(np.abs(sc))
    if mass[-1] <= 0:
        return None
    lo = tau[np.searchsorted(mass, 0.001 * mass[-1])]
    hi = tau[min(np.searchsorted(mass, 0.999 * mass[-1]), tau.size - 1)]
    pad = 0.1 * (hi - lo) + 2 * (tau[1] - tau[0])
    return lo - pad, hi + pad


def to_svg(table):
    """Self-contained 800x500 SVG: every column as a polyline, legend, SC inset."""
    names = table.names
    if not names:
        raise ValueError("table has no distribution columns")
    tau = np.asarray(table.columns["tau"], dtype=np.float64)
    main_names = [n for n in names if n != "sc"] or names
    ymax = max(float(np.max(table.columns[n])) for n in main_names)
    ymin = min(0.0, min(float(np.min(table.columns[n])) for n in main_names))
    ymax = ymax * 1.08 if ymax > 0 else 1.0
    if "sc" in names:
        # keep the main curves below the inset
        free = (_PLOT[3] - _INSET[3] - 10) / (_PLOT[3] - _PLOT[1])
        ymax = ymin + (ymax - ymin) / free
    frame = _Frame(_PLOT, (float(tau[0]), float(tau[-1])), (ymin, ymax))
    n_bins = int(_PLOT[2] - _PLOT[0])

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
           "<metadata>" + escape(json.dumps(table.metadata, sort_keys=True, separators=(",", ":")))
           + "</metadata>",
           "<defs>",
           f'<clipPath id="main"><rect x="{_PLOT[0]}" y="{_PLOT[1]}" width="{_PLOT[2] - _PLOT[0]}" '
           f'height="{_PLOT[3] - _PLOT[1]}"/></clipPath>',
           f'<clipPath id="inset"><rect x="{_INSET[0]}" y="{_INSET[1]}" width="{_INSET[2] - _INSET[0]}" '
           f'height="{_INSET[3] - _INSET[1]}"/></clipPath>',
           "</defs>",
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    out += frame.axes("τ", "Π(τ)")
    for name in names:
        x, y = _decimate(tau, np.asarray(table.columns[name], dtype=np.float64), n_bins)
        out.append(frame.polyline(x, y, _COLORS[name], "main"))

    # legend
    lx, ly = _PLOT[0] + 12, _PLOT[1] + 16
    for i, name in enumerate(names):
        y = ly + 16 * i
        out.append(f'<line x1="{lx}" y1="{y - 4}" x2="{lx + 22}" y2="{y - 4}" '
                   f'stroke="{_COLORS[name]}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{y}" font-size="11">{LABELS[name]}</text>')

    if "sc" in names:
        sc = np.asarray(table.columns["sc"], dtype=np.float64)
        win = _sc_window(tau, sc)
        if win is not None:
            sel = (tau >= win[0]) & (tau <= win[1])
            if np.count_nonzero(sel) >= 2:
                top = float(sc[sel].max()) * 1.08 or 1.0
                inset = _Frame(_INSET, (float(tau[sel][0]), float(tau[sel][-1])), (0.0, top))
                out += inset.axes(font=10)
                out.append(inset.polyline(*_decimate(tau[sel], sc[sel], _INSET[2] - _INSET[0]),
                                          _COLORS["sc"], "inset", width=1.0))
                out.append(f'<text x="{_INSET[0] + 6}" y="{_INSET[1] + 13}" font-size="10">'
                           f'{LABELS["sc"]} (magnified)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit(table, fmt, path=None):
    """Render ``table`` as ``csv`` or ``svg``; write to ``path`` or return the text."""
    if fmt == "csv":
        text = to_csv(table)
    elif fmt == "svg":
        text = to_svg(table)
    else:
        raise ValueError("format must be csv or svg")
    if path is None:
        return text
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return text
