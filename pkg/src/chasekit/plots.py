"""Figure rendering for run and sweep reports.

Works from the CSV/summary data the CLI emits, so figures can be
regenerated offline:  ``python -m chasekit.plots run.csv out.png``.
"""

from __future__ import annotations

import csv
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _read_run_csv(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))

    def column(name):
        vals = []
        for row in rows:
            raw = row.get(name, "")
            vals.append(float(raw) if raw not in ("", None) else np.nan)
        return np.array(vals)

    return {
        "t": column("t"),
        "movement": column("movement"),
        "hit": column("hit"),
        "phi": column("phi"),
        "residual": column("residual"),
    }


def plot_run(csv_path, out_path, title=None):
    """Per-step movement/hit bars, cumulative cost, and the potential
    trace when the run carried a comparator."""
    data = _read_run_csv(csv_path)
    t = data["t"]
    has_phi = np.any(np.isfinite(data["phi"]))
    n_rows = 3 if has_phi else 2
    fig, axes = plt.subplots(n_rows, 1, figsize=(7.0, 2.4 * n_rows), sharex=True)

    axes[0].bar(t - 0.2, data["movement"], width=0.4, label="movement")
    axes[0].bar(t + 0.2, data["hit"], width=0.4, label="hit")
    axes[0].set_ylabel("per-step cost")
    axes[0].legend(loc="best", fontsize=8)

    cumulative = np.cumsum(data["movement"] + data["hit"])
    axes[1].plot(t, cumulative, marker=".", lw=1.2)
    axes[1].set_ylabel("cumulative cost")

    if has_phi:
        axes[2].plot(t, data["phi"], marker=".", lw=1.2, color="tab:green")
        axes[2].set_ylabel("potential")
        axes[2].set_xlabel("step")
    else:
        axes[1].set_xlabel("step")
    if title:
        axes[0].set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_compare(csv_path, out_path, alg_label="algorithm", opt_cost=None, title=None):
    """Cumulative algorithm cost against the offline upper bound."""
    data = _read_run_csv(csv_path)
    t = data["t"]
    cumulative = np.cumsum(data["movement"] + data["hit"])
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    ax.plot(t, cumulative, marker=".", lw=1.2, label=alg_label)
    if opt_cost is not None:
        ax.axhline(opt_cost, color="tab:red", ls="--", lw=1.0, label="offline upper bound")
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative cost")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_sweep(kappas, ratios, out_path, exponent=None, r2=None, title=None):
    """Log-log ratios against the condition number, with the fitted slope."""
    kappas = np.asarray(kappas, dtype=float)
    ratios = np.asarray(ratios, dtype=float)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.loglog(kappas, ratios, "o", label="measured ratio")
    if exponent is not None:
        anchor = ratios[0] / kappas[0] ** exponent
        xs = np.linspace(kappas.min(), kappas.max(), 50)
        label = f"slope {exponent:.3f}"
        if r2 is not None:
            label += f" (r$^2$={r2:.3f})"
        ax.loglog(xs, anchor * xs**exponent, "--", color="tab:red", label=label)
    ax.set_xlabel("condition number")
    ax.set_ylabel("cost ratio (lower bound)")
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print("usage: python -m chasekit.plots RUN_CSV OUT_PNG", file=sys.stderr)
        return 2
    plot_run(argv[0], argv[1])
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
