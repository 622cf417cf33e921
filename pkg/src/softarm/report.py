"""Report rendering: delimited output plus figures on disk.

Turns a validation report or a program run into files under one
directory: a CSV with the numbers, a JSON copy of the same data, and
PNG figures.  Rendering uses the Agg backend so it works headless;
this module is imported only when a report is requested, keeping
matplotlib off the critical path.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import PROBE_AXES, ValidationReport
from .orchestrator import ExecutionRecord


def _ensure_dir(out_dir: str) -> None:
    os.makedirs(out_dir, exist_ok=True)


def write_validation_report(report: ValidationReport, out_dir: str) -> list[str]:
    """Write CSV, JSON and figures for a validation run; returns the paths."""
    _ensure_dir(out_dir)
    paths = []

    csv_path = os.path.join(out_dir, "validation.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "component", "mean", "sem", "n"])
        for metric, component, stat in (
            ("move_error_mm", "horizontal", report.move_error_horizontal_mm),
            ("move_error_mm", "vertical", report.move_error_vertical_mm),
            ("return_error_mm", "horizontal", report.return_error_horizontal_mm),
            ("return_error_mm", "vertical", report.return_error_vertical_mm),
        ):
            writer.writerow([metric, component, f"{stat.mean:.6f}", f"{stat.sem:.6f}", stat.n])
        rot = report.rotation_error_deg
        writer.writerow(["rotation_error_deg", "base", f"{rot.mean:.6f}", f"{rot.sem:.6f}", rot.n])
        for axis, value in zip(PROBE_AXES, report.backlash_mm):
            writer.writerow(["backlash_mm", axis, f"{value:.6f}", "", 1])
        writer.writerow(["single_step_error_mm", "pose", f"{report.single_step_error_mm:.6f}", "", 1])
        writer.writerow(["steps_lost", "total", report.steps_lost, "", 1])
    paths.append(csv_path)

    json_path = os.path.join(out_dir, "validation.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")
    paths.append(json_path)

    fig, (ax_err, ax_play) = plt.subplots(1, 2, figsize=(9, 4))
    labels = ["move H", "move V", "return H", "return V"]
    stats = [
        report.move_error_horizontal_mm,
        report.move_error_vertical_mm,
        report.return_error_horizontal_mm,
        report.return_error_vertical_mm,
    ]
    ax_err.bar(labels, [s.mean for s in stats], yerr=[s.sem for s in stats], capsize=4)
    ax_err.set_ylabel("error (mm)")
    ax_err.set_title(f"{report.n_moves} moves of {report.distance_mm:g} mm")
    ax_play.bar(PROBE_AXES, report.backlash_mm)
    ax_play.set_ylabel("play (mm)")
    ax_play.set_title("end effector backlash")
    ax_play.tick_params(axis="x", rotation=20)
    fig.tight_layout()
    fig_path = os.path.join(out_dir, "validation.png")
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    paths.append(fig_path)

    return paths


def write_run_report(
    records: list[ExecutionRecord],
    pressure_log: list[tuple[int, float, float, float, float]],
    out_dir: str,
) -> list[str]:
    """Write CSV, JSON and figures for a program run; returns the paths."""
    _ensure_dir(out_dir)
    paths = []

    csv_path = os.path.join(out_dir, "run.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["line_no", "instruction", "dispatched_ms", "completed_ms", "outcome", "detail"]
        )
        for record in records:
            writer.writerow(
                [
                    record.line_no,
                    record.instruction,
                    record.dispatched_at_ms,
                    record.completed_at_ms,
                    record.outcome,
                    record.detail,
                ]
            )
    paths.append(csv_path)

    json_path = os.path.join(out_dir, "run.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump([record.as_dict() for record in records], fh, indent=2)
        fh.write("\n")
    paths.append(json_path)

    if pressure_log:
        fig, (ax_p, ax_u) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
        t = [row[0] / 1000.0 for row in pressure_log]
        ax_p.plot(t, [row[1] for row in pressure_log], lw=0.8)
        ax_p.set_ylabel("gauge pressure (kPa)")
        ax_u.plot(t, [row[3] for row in pressure_log], lw=0.8, label="pump")
        ax_u.plot(t, [row[4] for row in pressure_log], lw=0.8, label="valve")
        ax_u.set_xlabel("time (s)")
        ax_u.set_ylabel("duty")
        ax_u.legend(loc="upper right")
        fig.tight_layout()
        fig_path = os.path.join(out_dir, "pressure.png")
        fig.savefig(fig_path, dpi=120)
        plt.close(fig)
        paths.append(fig_path)

    return paths
