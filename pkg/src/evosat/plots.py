"""Figure rendering for evolution traces and comparison reports."""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from evosat.harness import ComparisonRow


def plot_fitness_trace(trace: Sequence[dict], path: str, title: str = "") -> str:
    """Per-generation best/median fitness as a line chart saved to path."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    if trace:
        gens = [t["generation"] for t in trace]
        ax.plot(gens, [t["best_S"] for t in trace], marker="o", ms=3, label="best S")
        ax.plot(gens, [t["median_S"] for t in trace], ls="--", label="median S")
        ax.plot(gens, [t["best_R"] for t in trace], alpha=0.6, label="best R")
        ax.legend(loc="lower right")
    else:
        ax.text(0.5, 0.5, "no generations completed", ha="center", va="center")
    ax.set_xlabel("generation")
    ax.set_ylabel("satisfied clauses")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_comparison(rows: Sequence[ComparisonRow], path: str) -> str:
    """GA-vs-baseline scatter for counts and times, saved to path.

    Only rows with results on both sides are drawn; highlighted rows are
    colored.  Axes go logarithmic when the value spread warrants it.
    """
    both = [r for r in rows if r.ga_count is not None and r.base_count is not None]
    fig, (ax_counts, ax_times) = plt.subplots(1, 2, figsize=(10.5, 4.6))
    if both:
        colors = ["tab:orange" if r.count_highlight else "tab:blue" for r in both]
        xs = [r.base_count for r in both]
        ys = [r.ga_count for r in both]
        ax_counts.scatter(xs, ys, c=colors, s=22, alpha=0.8)
        lo, hi = min(xs + ys), max(xs + ys)
        ax_counts.plot([lo, hi], [lo, hi], color="gray", lw=1, ls=":")
        if lo > 0 and hi / max(lo, 1) > 50:
            ax_counts.set_xscale("log")
            ax_counts.set_yscale("log")
        ts = [
            (r.base_time_s, r.ga_time_s, r.time_highlight)
            for r in both
            if r.base_time_s is not None and r.ga_time_s is not None
        ]
        if ts:
            ax_times.scatter(
                [t[0] for t in ts],
                [t[1] for t in ts],
                c=["tab:orange" if t[2] else "tab:blue" for t in ts],
                s=22,
                alpha=0.8,
            )
            tlo = min(min(t[0] for t in ts), min(t[1] for t in ts))
            thi = max(max(t[0] for t in ts), max(t[1] for t in ts))
            ax_times.plot([tlo, thi], [tlo, thi], color="gray", lw=1, ls=":")
            if tlo > 0 and thi / tlo > 50:
                ax_times.set_xscale("log")
                ax_times.set_yscale("log")
    else:
        ax_counts.text(0.5, 0.5, "no comparable rows", ha="center", va="center")
    ax_counts.set_xlabel("baseline best count")
    ax_counts.set_ylabel("GA best count")
    ax_counts.set_title("satisfied clauses (highlighted rows in orange)")
    ax_times.set_xlabel("baseline time to best (s)")
    ax_times.set_ylabel("GA time to best (s)")
    ax_times.set_title("time to best")
    for ax in (ax_counts, ax_times):
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
