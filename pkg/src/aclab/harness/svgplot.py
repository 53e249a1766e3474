"""Learning-curve plots as hand-assembled SVG.

Each metrics file becomes one curve: the per-checkpoint mean across runs,
with a shaded band of plus/minus one sample standard deviation of the
per-run means. With a single run the band has zero width and the legend
says so. No plotting library is involved; the output is a standalone file.
"""

import math
import os
from xml.sax.saxutils import escape

from aclab.errors import SpecError
from aclab.harness.metrics import aggregate, load_metrics

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

WIDTH, HEIGHT = 840, 520
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 180, 30, 50


def _nice_step(raw):
    if raw <= 0:
        return 1.0
    magnitude = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 5, 10):
        if mult * magnitude >= raw:
            return mult * magnitude
    return 10 * magnitude


def _fmt(v):
    return f"{v:g}"


def _series_from_file(path):
    records = load_metrics(path)
    if not records:
        raise SpecError(f"metrics file {path} has no records")
    pcts, means, sds = aggregate(records)
    n_runs = len({r.run_id for r in records})
    uses_mass = all(r.final_mass is not None for r in records)
    label = os.path.splitext(os.path.basename(path))[0]
    return {
        "label": label,
        "pcts": pcts,
        "means": means,
        "sds": sds,
        "n_runs": n_runs,
        "uses_mass": uses_mass,
    }


def emit_curves(metrics_paths, out_path):
    """Render one curve per metrics file into out_path; returns the series."""
    if not metrics_paths:
        raise SpecError("need at least one metrics file")
    series = [_series_from_file(p) for p in metrics_paths]
    for i, s in enumerate(series):
        s["color"] = PALETTE[i % len(PALETTE)]

    lo = min(m - sd for s in series for m, sd in zip(s["means"], s["sds"]))
    hi = max(m + sd for s in series for m, sd in zip(s["means"], s["sds"]))
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(pct):
        return MARGIN_LEFT + pct / 100.0 * plot_w

    def sy(value):
        return MARGIN_TOP + (hi - value) / (hi - lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]

    for pct in range(0, 101, 20):
        x = sx(pct)
        parts.append(
            f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" '
            f'y2="{MARGIN_TOP + plot_h}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 20}" font-size="12" '
            f'text-anchor="middle" font-family="sans-serif">{pct}</text>'
        )
    step = _nice_step((hi - lo) / 5.0)
    tick = math.ceil(lo / step) * step
    while tick <= hi:
        y = sy(tick)
        parts.append(
            f'<line x1="{MARGIN_LEFT}" y1="{y:.2f}" x2="{MARGIN_LEFT + plot_w}" '
            f'y2="{y:.2f}" stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="12" '
            f'text-anchor="end" font-family="sans-serif">{_fmt(tick)}</text>'
        )
        tick += step

    parts.append(
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 12}" font-size="14" '
        f'text-anchor="middle" font-family="sans-serif">training progress (%)</text>'
    )
    if all(s["uses_mass"] for s in series):
        y_label = "final mass"
    elif not any(s["uses_mass"] for s in series):
        y_label = "episode return"
    else:
        y_label = "performance"
    parts.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.2f}" font-size="14" '
        f'text-anchor="middle" font-family="sans-serif" '
        f'transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.2f})">{escape(y_label)}</text>'
    )

    for s in series:
        band = [(sx(p), sy(m + sd)) for p, m, sd in zip(s["pcts"], s["means"], s["sds"])]
        band += [
            (sx(p), sy(m - sd))
            for p, m, sd in reversed(list(zip(s["pcts"], s["means"], s["sds"])))
        ]
        points = " ".join(f"{x:.2f},{y:.2f}" for x, y in band)
        parts.append(
            f'<polygon points="{points}" fill="{s["color"]}" fill-opacity="0.2" stroke="none"/>'
        )
        line = " ".join(
            f"{sx(p):.2f},{sy(m):.2f}" for p, m in zip(s["pcts"], s["means"])
        )
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{s["color"]}" stroke-width="2"/>'
        )

    legend_x = MARGIN_LEFT + plot_w + 14
    legend_y = MARGIN_TOP + 10
    for s in series:
        label = s["label"]
        if s["n_runs"] == 1:
            label += " (1 run)"
        parts.append(
            f'<line x1="{legend_x}" y1="{legend_y}" x2="{legend_x + 24}" '
            f'y2="{legend_y}" stroke="{s["color"]}" stroke-width="3"/>'
        )
        parts.append(
            f'<text x="{legend_x + 30}" y="{legend_y + 4}" font-size="12" '
            f'font-family="sans-serif">{escape(label)}</text>'
        )
        legend_y += 20
    parts.append(
        f'<text x="{legend_x}" y="{legend_y + 4}" font-size="10" fill="#666666" '
        f'font-family="sans-serif">band: ±1 SD across runs</text>'
    )
    parts.append("</svg>")

    with open(out_path, "w") as f:
        f.write("\n".join(parts) + "\n")
    return series
