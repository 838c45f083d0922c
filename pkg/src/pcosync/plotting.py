"""Optional figures for the report path of the command line tool.

matplotlib is imported lazily with the non-interactive Agg backend so the
core package never depends on it.
"""
from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def histogram_figure(result, path: str | Path) -> Path:
    """Bar chart of window-index frequencies with the geometric bound overlaid."""
    plt = _pyplot()
    rows = result.rows()
    xs = [r[0] for r in rows]
    total = sum(r[1] for r in rows) + result.censored
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(xs, [r[1] for r in rows], color="tab:blue", label="paths")
    ax.plot(xs, [total * (r[2] if r[2] is not None else 0.0) for r in rows], "o-",
            color="tab:orange", label="paths still unsynchronized")
    bound = [r[3] for r in rows]
    if all(b is not None for b in bound):
        ax.plot(xs, [total * b for b in bound], "--", color="tab:red", label="bound")
    ax.set_xticks(xs)
    ax.set_xlabel(f"window index n (window = {result.T_window:g})")
    ax.set_ylabel("paths")
    ax.set_ylim(0, total * 1.05)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def scaling_figure(result, path: str | Path) -> Path:
    """Per-trial hitting times and cell means (with standard errors) against the fitted line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    hits = [(t.n_agents, t.hit_time) for t in result.trials if t.hit_time is not None]
    if hits:
        ax.scatter(*zip(*hits), marker="x", s=10, color="0.6", label="trials")
    cells = [c for c in result.cells if c.mean is not None]
    ax.errorbar([c.n for c in cells], [c.mean for c in cells], yerr=[c.se for c in cells],
                fmt="s", color="tab:red", label="mean")
    xs = [result.cells[0].n, result.cells[-1].n]
    ax.plot(xs, [result.slope * x + result.intercept for x in xs], "-", color="tab:blue",
            label=f"fit {result.slope:.3g} N {result.intercept:+.3g}")
    ax.set_xlabel("N")
    ax.set_ylabel("first hitting time")
    ax.set_title(result.family)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def trajectory_figure(record, path: str | Path) -> Path:
    """Phases and the arc Lyapunov value against time."""
    plt = _pyplot()
    ev = record.events
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ts = [e.t for e in ev]
    for i in range(record.n):
        ax1.plot(ts, [e.phases[i] for e in ev], lw=0.8)
    ax1.set_ylabel("phase")
    ax2.step(ts, [e.V for e in ev], where="post", color="k")
    ax2.set_ylabel("V")
    ax2.set_xlabel("t")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
