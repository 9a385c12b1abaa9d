"""Matrix reporting: delimited tables plus rendered figures.

``write_matrix_csv`` emits the delimited table; ``render_matrix_heatmap``
draws the red-win-rate heatmap for the same matrix to an image file next
to it.  ``format_matrix_table`` gives the aligned text shown on stdout.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # render to files; no display in scope

import matplotlib.pyplot as plt
import numpy as np

from .harness import Matrix

__all__ = ["write_matrix_csv", "render_matrix_heatmap", "format_matrix_table"]

_CSV_COLUMNS = ["scenario", "red", "blue", "games", "red_wins", "blue_wins",
                "draws", "red_win_rate", "ci_low", "ci_high", "mean_ticks"]


def write_matrix_csv(matrix: Matrix, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_COLUMNS)
        for (red, blue), cell in sorted(matrix.cells.items()):
            writer.writerow([
                matrix.scenario_id, red, blue, cell.games, cell.red_wins,
                cell.blue_wins, cell.draws, f"{cell.red_win_rate:.4f}",
                f"{cell.ci_low:.4f}", f"{cell.ci_high:.4f}",
                f"{cell.mean_ticks:.1f}"])


def format_matrix_table(matrix: Matrix) -> str:
    header = f"scenario {matrix.scenario_id}  " \
             f"({matrix.games_per_cell} games/cell, seed {matrix.base_seed})"
    lines = [header, ""]
    lines.append(f"{'red':<8} {'blue':<8} {'win':>6} {'draw':>6} {'loss':>6} "
                 f"{'rate':>7} {'95% ci':>15} {'ticks':>7}")
    for (red, blue), c in sorted(matrix.cells.items()):
        ci = f"[{c.ci_low:.3f},{c.ci_high:.3f}]"
        lines.append(f"{red:<8} {blue:<8} {c.red_wins:>6} {c.draws:>6} "
                     f"{c.blue_wins:>6} {c.red_win_rate:>7.3f} {ci:>15} "
                     f"{c.mean_ticks:>7.1f}")
    return "\n".join(lines)


def render_matrix_heatmap(matrix: Matrix, path: Path) -> None:
    """Red-win-rate heatmap, red policies on rows, blue on columns."""
    reds = sorted({red for red, _ in matrix.cells})
    blues = sorted({blue for _, blue in matrix.cells})
    grid = np.full((len(reds), len(blues)), np.nan)
    for (red, blue), cell in matrix.cells.items():
        grid[reds.index(red), blues.index(blue)] = cell.red_win_rate

    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(blues),
                                    1.4 + 0.9 * len(reds)))
    image = ax.imshow(grid, cmap="RdBu_r", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(blues)), labels=blues)
    ax.set_yticks(range(len(reds)), labels=reds)
    ax.set_xlabel("blue policy")
    ax.set_ylabel("red policy")
    ax.set_title(f"red win rate, {matrix.scenario_id} "
                 f"({matrix.games_per_cell} games)")
    for i in range(len(reds)):
        for j in range(len(blues)):
            if not np.isnan(grid[i, j]):
                cell = matrix.cells[(reds[i], blues[j])]
                ax.text(j, i, f"{grid[i, j]:.2f}\n{cell.mean_ticks:.0f}t",
                        ha="center", va="center", fontsize=9,
                        color="white" if abs(grid[i, j] - 0.5) > 0.3 else "black")
    fig.colorbar(image, ax=ax, shrink=0.8, label="red win rate")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
