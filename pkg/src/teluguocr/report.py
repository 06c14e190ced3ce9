"""Report rendering: CSV tables plus matplotlib figures written next to
them by the CLI's train/eval paths."""

from __future__ import annotations

import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def write_history_report(history: list[dict], out_dir) -> tuple[str, str]:
    """Write history.csv and training_curves.png; returns both paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "history.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["epoch", "train_loss", "val_accuracy"])
        writer.writeheader()
        for entry in history:
            writer.writerow(entry)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    epochs = [e["epoch"] for e in history]
    ax1.plot(epochs, [e["train_loss"] for e in history], marker="o", ms=3)
    ax1.set_xlabel("epoch")
    ax1.set_ylabel("train loss")
    ax2.plot(epochs, [e["val_accuracy"] for e in history], marker="o", ms=3, color="tab:green")
    ax2.set_xlabel("epoch")
    ax2.set_ylabel("val accuracy")
    ax2.set_ylim(0, 1.02)
    fig.tight_layout()
    fig_path = os.path.join(out_dir, "training_curves.png")
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path


def write_eval_report(per_class: dict[str, dict[int, float]], summary: dict[str, float], out_dir):
    """Per-class accuracy CSV plus a bar-chart figure per target."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, "eval.csv")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["target", "class_id", "accuracy"])
        for target, accs in per_class.items():
            for cid in sorted(accs):
                writer.writerow([target, cid, f"{accs[cid]:.4f}"])
        for key, val in summary.items():
            writer.writerow(["summary", key, f"{val:.4f}"])
    fig, axes = plt.subplots(len(per_class), 1, figsize=(10, 3 * len(per_class)), squeeze=False)
    for ax, (target, accs) in zip(axes[:, 0], per_class.items()):
        ids = sorted(accs)
        ax.bar(ids, [accs[i] for i in ids], color="tab:blue")
        ax.set_title(f"{target} per-class accuracy")
        ax.set_xlabel("class id")
        ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig_path = os.path.join(out_dir, "eval_per_class.png")
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    return csv_path, fig_path
