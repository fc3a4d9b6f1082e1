"""Figure construction from validated result rows."""

from __future__ import annotations

import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .schema import SchemaError

_CCDF_RE = re.compile(r"^ccdf\[([0-9.]+)\]$")

# one fixed color per waveform, one linestyle per (M, N) grid encountered
_COLORS = {"ofdm": "tab:blue", "dft-s-ofdm": "tab:orange",
           "otfs": "tab:green", "dft-s-otfs": "tab:red"}
_LINESTYLES = ["-", "--", ":", "-."]


def _color(waveform):
    return _COLORS.get(waveform, "tab:gray")


def render_ccdf(rows, out_path: str):
    """PAPR CCDF plot: one curve per (waveform, M, N), log probability axis.

    Each waveform is labeled exactly once in the legend; additional grids of
    the same waveform share its color with a different linestyle.
    """
    curves = {}
    for r in rows:
        m = _CCDF_RE.match(r.metric)
        if not m:
            continue
        curves.setdefault((r.waveform, r.m, r.n), []).append(
            (float(m.group(1)), r.value))
    if not curves:
        raise SchemaError("no ccdf[...] rows to plot")

    grids = sorted({(m, n) for _, m, n in curves})
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    labeled = set()
    for (wf, m, n), points in sorted(curves.items()):
        points.sort()
        x = [p[0] for p in points]
        y = [max(p[1], 1e-12) for p in points]
        if wf not in labeled:
            label = wf if len(grids) == 1 else f"{wf} (M={m}, N={n})"
            labeled.add(wf)
        else:
            label = "_nolegend_"
        ax.semilogy(x, y, label=label, color=_color(wf),
                    linestyle=_LINESTYLES[grids.index((m, n)) % len(_LINESTYLES)])
    ax.set_xlabel("PAPR threshold (dB)")
    ax.set_ylabel("CCDF  P(PAPR > threshold)")
    ax.set_ylim(1e-4, 1.0)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_rmse(rows, out_path: str):
    """Range-RMSE bar chart: grouped by waveform, one bar per (M, N) grid."""
    data = {}
    for r in rows:
        if r.metric == "range_rmse_m":
            data.setdefault((r.m, r.n), {})[r.waveform] = r.value
    if not data:
        raise SchemaError("no range_rmse_m rows to plot")

    grids = sorted(data)
    waveforms = sorted({wf for d in data.values() for wf in d})
    width = 0.8 / len(grids)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for gi, grid in enumerate(grids):
        xs = [i + (gi - (len(grids) - 1) / 2) * width
              for i in range(len(waveforms))]
        ys = [data[grid].get(wf, 0.0) * 1e3 for wf in waveforms]
        ax.bar(xs, ys, width=width, label=f"M={grid[0]}, N={grid[1]}")
    ax.set_xticks(range(len(waveforms)))
    ax.set_xticklabels(waveforms)
    ax.set_ylabel("range RMSE (mm)")
    ax.grid(True, axis="y", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
