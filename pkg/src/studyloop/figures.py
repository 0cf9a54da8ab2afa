"""Render seeking figures to image files from the figure-data tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .seekchains import FigureData


def _mark_quizzes(ax, quiz_positions, label: str = "quiz") -> None:
    for i, q in enumerate(quiz_positions):
        ax.axvline(q, color="red", linestyle="--", linewidth=1,
                   label=label if i == 0 else None)


def render_seek_scatter(fd: FigureData, title: str, path: str | Path) -> Path:
    """Each point (x, y) is one chain seeking from second x to second y."""
    fig, ax = plt.subplots(figsize=(6, 6))
    if fd.scatter:
        xs, ys = zip(*fd.scatter)
        ax.scatter(xs, ys, s=8, alpha=0.4, color="tab:blue")
    _mark_quizzes(ax, fd.quiz_positions)
    if fd.quiz_positions:
        for q in fd.quiz_positions:
            ax.axhline(q, color="red", linestyle=":", linewidth=0.8)
    ax.set_xlabel("seek source (s)")
    ax.set_ylabel("seek destination (s)")
    ax.set_title(title)
    if fd.quiz_positions:
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def _render_counts(counts, quiz_positions, ylabel: str, title: str, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.fill_between(range(len(counts)), counts, step="post", color="tab:blue", alpha=0.7)
    _mark_quizzes(ax, quiz_positions)
    ax.set_xlabel("video second")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if quiz_positions:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def render_seek_destinations(fd: FigureData, title: str, path: str | Path) -> Path:
    return _render_counts(fd.destination_counts, fd.quiz_positions,
                          "chains landing here", title, path)


def render_skip_coverage(fd: FigureData, title: str, path: str | Path) -> Path:
    return _render_counts(fd.skip_counts, fd.quiz_positions,
                          "forward chains skipping this second", title, path)


def render_video_figures(fd: FigureData, video_id: str, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        render_seek_scatter(fd, f"Seek chains: {video_id}", out_dir / "scatter.png"),
        render_seek_destinations(fd, f"Seek destinations: {video_id}",
                                 out_dir / "seek_destinations.png"),
        render_skip_coverage(fd, f"Skipped seconds: {video_id}",
                             out_dir / "skip_coverage.png"),
    ]
