"""Render evaluation and study reports: delimited tables plus figures.

Figures are written headlessly (Agg backend) next to the CSV/JSON output so
a report directory is self-contained.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .study.core import Criterion, PreferenceRecord
from .study.ratings import fit_ratings, win_rates


def _atomic_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_eval_report(report: dict, out_dir: str | Path) -> dict[str, str]:
    """Write a trajectory-metrics report: JSON, CSV, and bar figures.

    `report` is the evaluate_scenes() output. Returns the artifact paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    json_path = out / "metrics.json"
    _atomic_text(json_path, json.dumps(report, indent=2, sort_keys=True) + "\n")
    paths["json"] = str(json_path)

    csv_path = out / "metrics.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scene", "min_ade_m", "apd_cm"])
        for row in report["scenes"]:
            writer.writerow([row["scene"], f"{row['min_ade']:.9f}",
                             "" if row["apd"] is None else f"{row['apd']:.9f}"])
    paths["csv"] = str(csv_path)

    scenes = [str(r["scene"]) for r in report["scenes"]]
    fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(scenes)), 3.2))
    ax.bar(scenes, [r["min_ade"] for r in report["scenes"]], color="#4878d0")
    ax.set_ylabel("minADE (m)")
    ax.set_xlabel("scene")
    ax.tick_params(axis="x", rotation=90)
    fig.tight_layout()
    minade_path = out / "minade.png"
    fig.savefig(minade_path)
    plt.close(fig)
    paths["minade_png"] = str(minade_path)

    apd_rows = [r for r in report["scenes"] if r["apd"] is not None]
    if apd_rows:
        fig, ax = plt.subplots(figsize=(max(4, 0.5 * len(apd_rows)), 3.2))
        ax.bar([str(r["scene"]) for r in apd_rows], [r["apd"] for r in apd_rows],
               color="#ee854a")
        ax.set_ylabel("APD (cm)")
        ax.set_xlabel("scene")
        ax.tick_params(axis="x", rotation=90)
        fig.tight_layout()
        apd_path = out / "apd.png"
        fig.savefig(apd_path)
        plt.close(fig)
        paths["apd_png"] = str(apd_path)

    return paths


def write_study_report(records: list[PreferenceRecord], models: tuple[str, ...],
                       out_dir: str | Path,
                       criteria: tuple[Criterion, ...] | None = None) -> dict[str, str]:
    """Write per-criterion win-rate and Elo tables with matching figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    criteria = criteria or tuple(Criterion)
    paths = {}

    elo_path = out / "elo.csv"
    rate_path = out / "win_rates.csv"
    with open(elo_path, "w", newline="") as elo_fh, open(rate_path, "w", newline="") as rate_fh:
        elo_writer = csv.writer(elo_fh)
        elo_writer.writerow(["criterion", "model", "elo", "wins", "ties", "losses"])
        rate_writer = csv.writer(rate_fh)
        rate_writer.writerow(["criterion", "model_a", "model_b", "n",
                              "a_pref", "b_pref", "no_pref"])
        for crit in criteria:
            table = fit_ratings(records, crit, models=models)
            for m in table.models:
                elo_writer.writerow([crit.value, m.model, f"{m.elo:.3f}",
                                     m.wins, m.ties, m.losses])
            for p in win_rates(records, crit, models=models):
                rate_writer.writerow([crit.value, p.model_a, p.model_b, p.n,
                                      f"{p.a_pref:.4f}", f"{p.b_pref:.4f}",
                                      f"{p.no_pref:.4f}"])
    paths["elo_csv"] = str(elo_path)
    paths["win_rates_csv"] = str(rate_path)

    for crit in criteria:
        rates = win_rates(records, crit, models=models)
        labels = [f"{p.model_a} vs {p.model_b}" for p in rates]
        a = [p.a_pref * 100 for p in rates]
        tie = [p.no_pref * 100 for p in rates]
        b = [p.b_pref * 100 for p in rates]
        fig, ax = plt.subplots(figsize=(7, max(2.5, 0.55 * len(labels))))
        y = range(len(labels))
        ax.barh(y, a, color="#4878d0", label="prefer first")
        ax.barh(y, tie, left=a, color="#bbbbbb", label="no preference")
        ax.barh(y, b, left=[ai + ti for ai, ti in zip(a, tie)],
                color="#ee854a", label="prefer second")
        ax.set_yticks(list(y), labels)
        ax.set_xlabel("share of ratings (%)")
        ax.set_xlim(0, 100)
        ax.set_title(f"head-to-head preference: {crit.value}")
        ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        fig_path = out / f"win_rates_{crit.value}.png"
        fig.savefig(fig_path)
        plt.close(fig)
        paths[f"win_rates_{crit.value}_png"] = str(fig_path)

        table = fit_ratings(records, crit, models=models)
        names = [m.model for m in table.models]
        elos = [m.elo for m in table.models]
        fig, ax = plt.subplots(figsize=(max(4, 0.8 * len(names)), 3.2))
        ax.bar(names, elos, color="#6acc64")
        ax.axhline(1500.0, color="black", linewidth=0.8, linestyle="--")
        ax.set_ylabel("rating")
        ax.set_title(f"rating table: {crit.value}")
        ax.tick_params(axis="x", rotation=30)
        fig.tight_layout()
        fig_path = out / f"elo_{crit.value}.png"
        fig.savefig(fig_path)
        plt.close(fig)
        paths[f"elo_{crit.value}_png"] = str(fig_path)

    return paths
