"""Data and plots for the squeezing-performance figures (2a, 2b, 2c)."""

from __future__ import annotations

import math

import numpy as np

from . import svgplot
from .gaussian import difference_surface, optimize_over_eta0, squeeze_sweep

FIG2A_ETA0S = (0.0, 0.05, 0.1, 0.2)
FIG2C_R0 = 0.1
FIG2C_MARK = 6000 / math.pi


def grid(start, stop, step):
    """Inclusive arithmetic grid, robust to float round-off at the end point."""
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError(f"empty grid {start}:{stop}:{step}")
    return [round(start + k * step, 12) for k in range(n)]


def fig2a(jobs=1):
    alphas = grid(0.0, 8.0, 0.05)
    rows = squeeze_sweep(["OAT", "TAT"], alphas, FIG2A_ETA0S, jobs=jobs)
    header = ["protocol", "alpha", "eta0", "xi2", "dB", "theta"]
    table = [[r.protocol, r.alpha, r.eta0, r.xi2, r.db, r.theta] for r in rows]
    series, markers = [], {}
    for proto, shape in (("OAT", "diamond"), ("TAT", "circle")):
        for e in FIG2A_ETA0S:
            sel = [r for r in rows if r.protocol == proto and r.eta0 == e]
            label = f"{proto} eta0={e:g}"
            series.append((label, [r.alpha for r in sel], [r.db for r in sel]))
            markers[label] = shape
    svg = svgplot.line_plot(series, "alpha", "squeezing (dB)", "Squeezing vs coupling", markers=markers)
    return header, table, svg


def fig2b():
    alphas = grid(0.0, 8.0, 0.1)
    eta0s = grid(0.0, 0.3, 0.01)
    surf = difference_surface(alphas, eta0s)
    header = ["alpha", "eta0", "xi2_oat_minus_tat"]
    table = [[a, e, surf[i, j]] for i, e in enumerate(eta0s) for j, a in enumerate(alphas)]
    svg = svgplot.heatmap(alphas, eta0s, surf.tolist(), "alpha", "eta0",
                          "xi2(OAT) - xi2(TAT)", "difference")
    return header, table, svg


def fig2c_grid(points=61):
    base = np.logspace(1, 4, points)
    return sorted(set(float(x) for x in base) | {FIG2C_MARK})


def fig2c(points=61, r0=FIG2C_R0):
    header = ["d_c", "r0", "eta0_oat", "alpha_oat", "dB_oat", "eta0_tat", "alpha_tat", "dB_tat"]
    table = []
    for dc in fig2c_grid(points):
        o = optimize_over_eta0(dc, r0, "OAT")
        t = optimize_over_eta0(dc, r0, "TAT")
        table.append([dc, r0, o.eta0, o.alpha, o.db, t.eta0, t.alpha, t.db])
    xs = [row[0] for row in table]
    series = [("OAT", xs, [row[4] for row in table]), ("TAT", xs, [row[7] for row in table])]
    svg = svgplot.line_plot(series, "cavity optical depth d_c", "optimized squeezing (dB)",
                            f"Optimized squeezing, r0 = {r0:g}", logx=True,
                            markers={"OAT": "diamond", "TAT": "circle"})
    return header, table, svg


FIGURES = {"2a": fig2a, "2b": fig2b, "2c": fig2c}
