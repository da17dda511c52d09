"""SVG plot emission for experiment artifacts.

Self-contained SVG files via the matplotlib Agg backend: learning curves,
discount-ratio traces against the selection threshold, and the extracted
trajectory over the grid.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_avg_reward(metrics, path, smooth_window=50):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(metrics.episode, metrics.total_reward, lw=0.4, alpha=0.4,
            color="tab:gray", label="per-episode total")
    ax.plot(metrics.episode, metrics.average_reward, lw=1.5,
            color="tab:blue", label="running average")
    if len(metrics) >= smooth_window:
        kernel = np.ones(smooth_window) / smooth_window
        smoothed = np.convolve(metrics.total_reward, kernel, mode="valid")
        ax.plot(metrics.episode[smooth_window - 1:], smoothed, lw=1.2,
                color="tab:orange", label=f"smoothed (w={smooth_window})")
    ax.set_xlabel("episode")
    ax.set_ylabel("reward")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_q0_ratio(metrics, path, delta=0.1):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(metrics.episode, metrics.q0_ar_ratio, lw=0.8, color="tab:blue")
    ax.axhline(delta, color="tab:red", ls="--", lw=1.0, label=f"threshold {delta}")
    ax.set_xlabel("episode")
    ax.set_ylabel("|Q0 - AR| / |Q0 + AR|")
    ax.set_yscale("log")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_trajectory(cells, cols, rows, start, terminal, path):
    """Draw the visited cell sequence over the grid."""
    fig, ax = plt.subplots(figsize=(5, 5))
    for c in range(cols + 1):
        ax.axvline(c, color="0.85", lw=0.6)
    for r in range(rows + 1):
        ax.axhline(r, color="0.85", lw=0.6)
    xs = [c + 0.5 for c, _ in cells]
    ys = [r + 0.5 for _, r in cells]
    ax.plot(xs, ys, "-o", color="tab:blue", ms=4, lw=1.5)
    ax.plot(start[0] + 0.5, start[1] + 0.5, "s", color="tab:green", ms=10, label="start")
    ax.plot(terminal[0] + 0.5, terminal[1] + 0.5, "*", color="tab:red", ms=14, label="terminal")
    ax.set_xlim(0, cols)
    ax.set_ylim(0, rows)
    ax.set_aspect("equal")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_field(report, path):
    """Objective-landscape heatmap with local maxima marked."""
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.pcolormesh(report.xs, report.ys, report.field, shading="auto")
    fig.colorbar(im, ax=ax, label="objective (bits/s/Hz)")
    if report.local_maxima:
        mx = [m[0] for m in report.local_maxima]
        my = [m[1] for m in report.local_maxima]
        ax.plot(mx, my, "r^", ms=8, label=f"{len(report.local_maxima)} local maxima")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
