"""
Figures for CLI runs.

Each renderer takes one of the tabular series a command emits (a mapping of
column name to values, the same data that goes into the CSV sidecar) and
writes a PNG. Only called when ``--plot`` is passed.
"""
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.frameon": False,
    "savefig.bbox": "tight",
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path)
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def density_plot(table: dict, x: str, path: Path, xlabel: str, title: str | None = None) -> Path:
    """Overlay every non-``x`` column of ``table`` against ``x``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = np.asarray(table[x])
        for name, ys in table.items():
            if name == x:
                continue
            ax.plot(xs, ys, label=name, lw=1.4)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("probability density")
        if title:
            ax.set_title(title)
        ax.legend()
        # crop to where the densities live
        peak = max(np.max(np.asarray(v)) for k, v in table.items() if k != x)
        live = xs[np.any([np.asarray(v) > 1e-6 * peak for k, v in table.items() if k != x], axis=0)]
        if live.size:
            pad = 0.1 * (live.max() - live.min() + 1e-12)
            ax.set_xlim(live.min() - pad, live.max() + pad)
        return _save(fig, path)


def convergence_plot(table: dict, path: Path, title: str | None = None) -> Path:
    """Estimate and absolute error against coupling strength ``k``."""
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.6))
        k = np.asarray(table["k"])
        ax0.plot(k, table["estimate"], "o-", label="estimate")
        ax0.plot(k, table["target"], "k--", lw=1, label="two-state value")
        ax0.set_xlabel("k")
        ax0.set_ylabel("Re (AB)_w")
        ax0.legend()
        err = np.asarray(table["abs_error"], dtype=float)
        floor = np.maximum(err, 1e-16)
        ax1.loglog(k, floor, "o-")
        if np.all(err > 1e-12):
            ref = floor[0] * (k / k[0]) ** 2
            ax1.loglog(k, ref, "k:", lw=1, label="k^2")
            ax1.legend()
        ax1.set_xlabel("k")
        ax1.set_ylabel("|error|")
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def amplitude_plot(table: dict, path: Path, title: str | None = None) -> Path:
    """Meter amplitudes (modulus and phase) per basis state, effective vs exact."""
    with plt.rc_context(STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9.0, 3.6))
        labels = [str(b) for b in table["basis"]]
        x = np.arange(len(labels))
        routes = [r for r in ("effective", "exact") if f"{r}_re" in table]
        width = 0.8 / max(len(routes), 1)
        for i, route in enumerate(routes):
            amp = np.asarray(table[f"{route}_re"]) + 1j * np.asarray(table[f"{route}_im"])
            ax0.bar(x + i * width, np.abs(amp), width, label=route)
            ax1.bar(x + i * width, np.angle(amp), width, label=route)
        for ax, ylabel in ((ax0, "|amplitude|"), (ax1, "phase [rad]")):
            ax.set_xticks(x + width * (len(routes) - 1) / 2)
            ax.set_xticklabels(labels)
            ax.set_ylabel(ylabel)
        ax0.legend()
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def counts_plot(table: dict, path: Path, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        bases = list(dict.fromkeys(table["basis_id"]))
        outcomes = sorted(set(table["outcome_id"]))
        width = 0.8 / len(outcomes)
        x = np.arange(len(bases))
        lookup = {(b, o): c for b, o, c in zip(table["basis_id"], table["outcome_id"], table["count"])}
        for j, o in enumerate(outcomes):
            ax.bar(x + j * width, [lookup.get((b, o), 0) for b in bases], width, label=f"outcome {o}")
        ax.set_xticks(x + width * (len(outcomes) - 1) / 2)
        ax.set_xticklabels(bases, rotation=45 if len(bases) > 4 else 0)
        ax.set_ylabel("counts")
        ax.legend(fontsize=8)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def render_series(name: str, table: dict, path: Path) -> Path | None:
    """Dispatch on the series name; unknown series are skipped."""
    if name == "q_density":
        return density_plot(table, "q", path, "Q", "pointer position density")
    if name == "p_density":
        return density_plot(table, "p", path, "P", "pointer momentum density")
    if name == "convergence":
        return convergence_plot(table, path, "two-pointer correlation estimate")
    if name == "meter_amplitudes":
        return amplitude_plot(table, path, "post-selected meter state")
    if name == "counts":
        return counts_plot(table, path, "tomography counts")
    logger.info("no renderer for series %r", name)
    return None
