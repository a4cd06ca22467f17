"""Self-contained SVG line charts of mx(t), with the envelope when known.

Output depends only on the trajectory: fixed number formatting, no timestamps,
no random ids.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError
from .llg import Trajectory, atomic_write

WIDTH, HEIGHT = 800, 400
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 20, 30, 45
N_TICKS = 5


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def _tick_label(v: float) -> str:
    s = f"{v:.3g}"
    return "0" if s in ("-0", "0") else s


class _Frame:
    """Maps data coordinates to SVG pixel coordinates."""

    def __init__(self, x0, x1, y0, y1):
        self.x0, self.x1 = x0, x1 if x1 > x0 else x0 + 1.0
        self.y0, self.y1 = y0, y1 if y1 > y0 else y0 + 1.0
        self.pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
        self.ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def px(self, x):
        return MARGIN_LEFT + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * self.pw

    def py(self, y):
        return MARGIN_TOP + (self.y1 - np.asarray(y)) / (self.y1 - self.y0) * self.ph


def _polyline(frame, x, y, style):
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in zip(frame.px(x), frame.py(y)))
    return f'<polyline fill="none" {style} points="{pts}"/>'


def render_svg(traj: Trajectory, title: str | None = None) -> str:
    if len(traj) == 0:
        raise DomainError("cannot plot an empty trajectory")
    t, mx = traj.times, traj.mx
    env = traj.envelope
    amp = float(np.max(np.abs(mx)))
    if env is not None:
        amp = max(amp, float(np.max(np.abs(env))))
    amp = 1.05 * amp if amp > 0 else 1.0
    frame = _Frame(float(t[0]), float(t[-1]), -amp, amp)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    label = title if title is not None else traj.label
    if label:
        out.append(
            f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-family="sans-serif" '
            f'font-size="14">{escape(label)}</text>'
        )

    left, right = MARGIN_LEFT, WIDTH - MARGIN_RIGHT
    top, bottom = MARGIN_TOP, HEIGHT - MARGIN_BOTTOM
    out.append(f'<rect x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" fill="none" stroke="black"/>')
    for v in np.linspace(frame.x0, frame.x1, N_TICKS):
        x = _fmt(frame.px(v))
        out.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 5}" stroke="black"/>')
        out.append(
            f'<text x="{x}" y="{bottom + 18}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{_tick_label(v)}</text>'
        )
    for v in np.linspace(frame.y0, frame.y1, N_TICKS):
        y = _fmt(frame.py(v))
        out.append(f'<line x1="{left - 5}" y1="{y}" x2="{left}" y2="{y}" stroke="black"/>')
        out.append(
            f'<text x="{left - 8}" y="{y}" text-anchor="end" dominant-baseline="middle" '
            f'font-family="sans-serif" font-size="11">{_tick_label(v)}</text>'
        )
    out.append(
        f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">t</text>'
    )
    out.append(
        f'<text x="16" y="{(top + bottom) / 2:.1f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 16 {(top + bottom) / 2:.1f})">mx</text>'
    )
    zero = _fmt(frame.py(0.0))
    out.append(f'<line x1="{left}" y1="{zero}" x2="{right}" y2="{zero}" stroke="#bbbbbb"/>')

    if env is not None:
        dashed = 'stroke="#d62728" stroke-width="1" stroke-dasharray="6,4"'
        out.append(_polyline(frame, t, env, f'class="envelope" {dashed}'))
        out.append(_polyline(frame, t, -np.asarray(env), f'class="envelope" {dashed}'))
    out.append(_polyline(frame, t, mx, 'class="mx" stroke="#1f77b4" stroke-width="1.2"'))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(traj: Trajectory, path: str, title: str | None = None) -> None:
    """Write the chart to ``path``; nothing is written for an empty trajectory."""
    atomic_write(path, render_svg(traj, title))
