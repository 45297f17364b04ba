"""Dependency-free SVG line and scatter charts.

Output is deterministic text (fixed-precision coordinates, no timestamps)
so rerunning a report produces byte-identical files. Charts are
data-complete companions to the CSVs, not a plotting library.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formats import sig6

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")

_LEFT = 64
_RIGHT = 150
_TOP = 36
_BOTTOM = 48


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass
class _Scale:
    lo: float
    hi: float
    px_lo: float
    px_hi: float

    def __call__(self, v: float) -> float:
        if self.hi == self.lo:
            return (self.px_lo + self.px_hi) / 2.0
        frac = (v - self.lo) / (self.hi - self.lo)
        return self.px_lo + frac * (self.px_hi - self.px_lo)


def _spread(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _frame(
    title: str,
    x_label: str,
    y_label: str,
    width: int,
    height: int,
    sx: _Scale,
    sy: _Scale,
    x_ticks: list[tuple[float, str]],
    y_ticks: list[tuple[float, str]],
) -> list[str]:
    x0, x1 = _LEFT, width - _RIGHT
    y0, y1 = height - _BOTTOM, _TOP
    ax = "#333333"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width // 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{_esc(title)}</text>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="{ax}"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="{ax}"/>',
    ]
    for ty, text in y_ticks:
        py = sy(ty)
        parts.append(
            f'<line x1="{x0 - 4}" y1="{_fmt(py)}" x2="{x0}" y2="{_fmt(py)}" stroke="{ax}"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{_fmt(py + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_esc(text)}</text>'
        )
    for tx, text in x_ticks:
        px = sx(tx)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{y0}" x2="{_fmt(px)}" y2="{y0 + 4}" stroke="{ax}"/>'
        )
        parts.append(
            f'<text x="{_fmt(px)}" y="{y0 + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_esc(text)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) // 2}" y="{height - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{_esc(x_label)}</text>'
    )
    parts.append(
        f'<text x="16" y="{(y0 + y1) // 2}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) // 2})">{_esc(y_label)}</text>'
    )
    return parts


def _legend(parts: list[str], width: int, index: int, name: str, color: str) -> None:
    ly = _TOP + 14 * index
    lx = width - _RIGHT + 12
    parts.append(f'<rect x="{lx}" y="{ly - 8}" width="10" height="10" fill="{color}"/>')
    parts.append(
        f'<text x="{lx + 14}" y="{ly + 1}" font-family="sans-serif" '
        f'font-size="11">{_esc(name)}</text>'
    )


def line_chart(
    title: str,
    x_label: str,
    y_label: str,
    series: list[tuple[str, list[float], list[float]]],
    x_tick_labels: list[str] | None = None,
    vline: tuple[float, str] | None = None,
    width: int = 720,
    height: int = 420,
) -> str:
    """Multi-series line chart; series are (name, xs, ys).

    When x_tick_labels is given the x axis is positional: xs are indexes
    into the label list (used for wide-range axes like weight counts).
    vline draws a dashed vertical marker, e.g. at a selected coordinate.
    """
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    if vline is not None:
        all_x.append(vline[0])
    if not all_x:
        all_x = [0.0]
    if not all_y:
        all_y = [0.0]
    x_lo, x_hi = min(all_x), max(all_x)
    y_lo, y_hi = min(all_y), max(all_y)
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    sx = _Scale(x_lo, x_hi, _LEFT, width - _RIGHT)
    sy = _Scale(y_lo, y_hi, height - _BOTTOM, _TOP)

    if x_tick_labels is not None:
        x_ticks = [(float(i), lab) for i, lab in enumerate(x_tick_labels)]
    else:
        x_ticks = [(t, sig6(t)) for t in _spread(x_lo, x_hi)]
    y_ticks = [(t, sig6(t)) for t in _spread(y_lo, y_hi)]

    parts = _frame(title, x_label, y_label, width, height, sx, sy, x_ticks, y_ticks)

    if vline is not None:
        vx, vlabel = vline
        px = sx(vx)
        parts.append(
            f'<line x1="{_fmt(px)}" y1="{_TOP}" x2="{_fmt(px)}" '
            f'y2="{height - _BOTTOM}" stroke="#555555" stroke-dasharray="4 3"/>'
        )
        if vlabel:
            parts.append(
                f'<text x="{_fmt(px + 4)}" y="{_TOP + 12}" font-family="sans-serif" '
                f'font-size="10" fill="#555555">{_esc(vlabel)}</text>'
            )

    for si, (name, xs, ys) in enumerate(series):
        color = PALETTE[si % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
        if len(xs) > 1:
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        for x, y in zip(xs, ys):
            parts.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="{color}"/>'
            )
        _legend(parts, width, si, name, color)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_chart(
    title: str,
    groups: list[tuple[str, list[float], list[float]]],
    x_tick_labels: list[str],
    y_label: str,
    refline_y: float | None = None,
    width: int = 720,
    height: int = 420,
) -> str:
    """Categorical-x scatter; groups are (name, x_positions, ys)."""
    all_y = [y for _, _, ys in groups for y in ys]
    y_lo = min(all_y + [0.0]) if all_y else 0.0
    y_hi = max(all_y + [1.0]) if all_y else 1.0
    if refline_y is not None:
        y_lo = min(y_lo, refline_y)
        y_hi = max(y_hi, refline_y)
    pad = 0.05 * (y_hi - y_lo) if y_hi > y_lo else 0.5
    y_lo, y_hi = y_lo - pad, y_hi + pad
    x_hi = float(max(len(x_tick_labels) - 1, 1))

    sx = _Scale(-0.5, x_hi + 0.5, _LEFT, width - _RIGHT)
    sy = _Scale(y_lo, y_hi, height - _BOTTOM, _TOP)
    x_ticks = [(float(i), lab) for i, lab in enumerate(x_tick_labels)]
    y_ticks = [(t, sig6(t)) for t in _spread(y_lo, y_hi)]

    parts = _frame(title, "", y_label, width, height, sx, sy, x_ticks, y_ticks)

    if refline_y is not None:
        py = sy(refline_y)
        parts.append(
            f'<line x1="{_LEFT}" y1="{_fmt(py)}" x2="{width - _RIGHT}" '
            f'y2="{_fmt(py)}" stroke="#aa0000" stroke-dasharray="6 3"/>'
        )
        parts.append(
            f'<text x="{width - _RIGHT + 6}" y="{_fmt(py + 4)}" '
            f'font-family="sans-serif" font-size="10" fill="#aa0000">'
            f"{sig6(refline_y)}</text>"
        )
    for gi, (name, xs, ys) in enumerate(groups):
        color = PALETTE[gi % len(PALETTE)]
        for x, y in zip(xs, ys):
            parts.append(
                f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="4" '
                f'fill="{color}" fill-opacity="0.8"/>'
            )
        _legend(parts, width, gi, name, color)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
