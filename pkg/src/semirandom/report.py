"""Figure rendering for experiment artifacts.

Each CLI command that writes a delimited artifact can render a companion
figure next to it.  Rendering always goes to files (Agg backend), never to
a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

DPI = 150


def save_history_figure(history, path, title: str = "") -> None:
    """Loss curves over epochs; test error on a twin axis when present."""
    epochs = [r.epoch for r in history.records]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(epochs, [r.train_loss for r in history.records], label="train loss")
    test_losses = [r.test_loss for r in history.records]
    if any(t == t for t in test_losses):  # NaN-free rows exist
        ax.plot(epochs, test_losses, label="test loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper right")
    errors = [r.test_error for r in history.records]
    if any(e == e for e in errors):
        twin = ax.twinx()
        twin.plot(epochs, errors, color="tab:red", alpha=0.6, label="test error")
        twin.set_ylabel("test error rate")
        twin.legend(loc="center right")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_oracle_figure(results, path) -> None:
    """Scatter of descent's final loss against the closed-form optimum."""
    opts = [r.global_min_loss for r in results]
    finals = [r.final_loss for r in results]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    colors = ["tab:green" if r.converged else "tab:red" for r in results]
    ax.scatter(opts, finals, c=colors, s=24, alpha=0.8)
    lo = min(min(opts, default=0.0), min(finals, default=0.0))
    hi = max(max(opts, default=1.0), max(finals, default=1.0))
    pad = 0.05 * (hi - lo) if hi > lo else 1e-3
    ax.plot([lo - pad, hi + pad], [lo - pad, hi + pad], "k--", lw=1, alpha=0.6)
    ax.set_xlabel("closed-form optimum")
    ax.set_ylabel("gradient-descent final loss")
    ax.set_title("landscape check (green = converged)")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_bound_sweep_figure(widths, adaptive_values, frozen_values, path) -> None:
    """Approximation floors against width, adaptive vs frozen features."""
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.plot(widths, adaptive_values, marker="o", label="adaptive (all layers)")
    ax.plot(widths, frozen_values, marker="s", label="frozen features")
    ax.set_xlabel("width per layer")
    ax.set_ylabel("approximation lower bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
