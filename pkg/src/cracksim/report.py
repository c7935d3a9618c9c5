"""Delimited output and figure rendering for experiment results.

CSV is the contract: stable column order, floats with 9 significant digits,
one row per (strategy, precoder, n, m, l) grid point. Rates are reported in
bit/s/Hz and also scaled by the configured bandwidth to bit/s. Figures are
rendered to PNG files next to the CSV as a visual companion, never as the
primary record.
"""

from __future__ import annotations

import csv
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from .tdd_sim import ErgodicReport  # noqa: E402

CSV_COLUMNS = (
    "strategy", "precoder", "n", "m", "l", "trials",
    "sum_rate_bps_hz", "sum_rate_ci95",
    "sum_secrecy_bps_hz", "sum_secrecy_ci95",
    "sop", "sop_ci95", "sop_any_user",
    "sum_rate_bps", "sum_secrecy_bps",
)


def fmt_float(x: float) -> str:
    """Decimal text with 9 significant digits."""
    return format(float(x), ".9g")


def report_row(report: ErgodicReport) -> dict:
    return {
        "strategy": report.strategy,
        "precoder": report.precoder,
        "n": report.n,
        "m": report.m,
        "l": report.l,
        "trials": report.trials,
        "sum_rate_bps_hz": fmt_float(report.sum_rate),
        "sum_rate_ci95": fmt_float(report.sum_rate_ci95),
        "sum_secrecy_bps_hz": fmt_float(report.sum_secrecy),
        "sum_secrecy_ci95": fmt_float(report.sum_secrecy_ci95),
        "sop": fmt_float(report.sop),
        "sop_ci95": fmt_float(report.sop_ci95),
        "sop_any_user": fmt_float(report.sop_any_user),
        "sum_rate_bps": fmt_float(report.sum_rate * report.bandwidth),
        "sum_secrecy_bps": fmt_float(report.sum_secrecy * report.bandwidth),
    }


def write_reports_csv(path: str, reports: Sequence[ErgodicReport],
                      index_column: Optional[str] = None,
                      indices: Optional[Sequence[int]] = None) -> None:
    """Write reports in order; optionally prefix an index column (used by the
    per-configuration histogram output)."""
    columns = list(CSV_COLUMNS)
    if index_column is not None:
        columns.insert(0, index_column)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for i, report in enumerate(reports):
            row = report_row(report)
            if index_column is not None:
                row[index_column] = indices[i] if indices is not None else i
            writer.writerow(row)


def _series_label(strategy: str, precoder: str) -> str:
    return f"{strategy}/{precoder}"


def sweep_figure(reports: Sequence[ErgodicReport], var: str, path: str) -> None:
    """Sum rate and SOP versus the swept variable, one line per
    (strategy, precoder) pair."""
    getter = {"n": lambda r: r.n, "m": lambda r: r.m, "l": lambda r: r.l}[var]
    series: dict = {}
    for r in reports:
        series.setdefault(_series_label(r.strategy, r.precoder), []).append(r)
    fig, (ax_rate, ax_sop) = plt.subplots(2, 1, figsize=(7.0, 7.5), sharex=True)
    for label, rows in series.items():
        rows = sorted(rows, key=getter)
        xs = [getter(r) for r in rows]
        ax_rate.errorbar(xs, [r.sum_rate for r in rows],
                         yerr=[r.sum_rate_ci95 for r in rows],
                         marker="o", capsize=3, label=label)
        ax_sop.errorbar(xs, [r.sop for r in rows],
                        yerr=[r.sop_ci95 for r in rows],
                        marker="s", capsize=3, label=label)
    ax_rate.set_ylabel("ergodic sum rate (bit/s/Hz)")
    ax_sop.set_ylabel("secrecy outage probability")
    ax_sop.set_xlabel(var)
    for ax in (ax_rate, ax_sop):
        ax.grid(True, alpha=0.4)
        ax.set_xscale("log", base=2)
    ax_rate.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def histogram_figure(reports: Sequence[ErgodicReport], path: str,
                     baseline: Optional[float] = None) -> None:
    """Distribution of per-configuration ergodic sum rates."""
    rates = [r.sum_rate for r in reports]
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.hist(rates, bins=min(30, max(5, len(rates) // 4)), edgecolor="black", alpha=0.8)
    if baseline is not None:
        ax.axvline(baseline, color="tab:red", linestyle="--",
                   label="no-attack mean")
        ax.legend(fontsize=8)
    ax.set_xlabel("ergodic sum rate (bit/s/Hz)")
    ax.set_ylabel("configurations")
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def compare_figure(reports: Sequence[ErgodicReport], path: str) -> None:
    """Grouped bars of sum rate and SOP per strategy, one group per precoder."""
    strategies = []
    for r in reports:
        if r.strategy not in strategies:
            strategies.append(r.strategy)
    precoders = []
    for r in reports:
        if r.precoder not in precoders:
            precoders.append(r.precoder)
    by_key = {(r.strategy, r.precoder): r for r in reports}
    width = 0.8 / max(1, len(precoders))
    fig, (ax_rate, ax_sop) = plt.subplots(2, 1, figsize=(8.0, 7.5), sharex=True)
    xs = range(len(strategies))
    for j, prec in enumerate(precoders):
        offs = [x + j * width for x in xs]
        rows = [by_key.get((s, prec)) for s in strategies]
        rates = [r.sum_rate if r else 0.0 for r in rows]
        errs = [r.sum_rate_ci95 if r else 0.0 for r in rows]
        sops = [r.sop if r else 0.0 for r in rows]
        sop_errs = [r.sop_ci95 if r else 0.0 for r in rows]
        ax_rate.bar(offs, rates, width=width, yerr=errs, capsize=3, label=prec)
        ax_sop.bar(offs, sops, width=width, yerr=sop_errs, capsize=3, label=prec)
    centers = [x + width * (len(precoders) - 1) / 2 for x in xs]
    ax_sop.set_xticks(centers)
    ax_sop.set_xticklabels(strategies, rotation=20)
    ax_rate.set_ylabel("ergodic sum rate (bit/s/Hz)")
    ax_sop.set_ylabel("secrecy outage probability")
    for ax in (ax_rate, ax_sop):
        ax.grid(True, axis="y", alpha=0.4)
    ax_rate.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
