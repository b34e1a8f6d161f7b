"""Markdown and CSV summaries of a results store.

Per learner and noise level, each method's accuracy is averaged over runs
per dataset and then over datasets. Non-baseline methods get a g,e,l row
(datasets where the baseline is greater, equal, less) and a Wilcoxon
signed-ranks p-value over the per-dataset accuracies. A method is marked
``✓`` when it is significantly more accurate than the baseline and ``✗``
when the baseline is significantly more accurate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .experiment import ResultsStore
from .stats import gel_counts, wilcoxon_signed_ranks

ALPHA = 0.05
BETTER, WORSE = "✓", "✗"
SUMMARY_FIELDS = ["learner", "noise", "method", "mean_accuracy", "n_datasets", "g", "e", "l", "W", "p", "mark"]


@dataclass
class Report:
    markdown: str
    csv: str
    rows: list = field(default_factory=list)
    missing: list = field(default_factory=list)


def _pct(x: float) -> str:
    return f"{100 * x:.2f}"


def _summary_rows(rs: ResultsStore, baseline: str, alpha: float):
    rows, missing = [], []
    datasets = rs.datasets
    for learner in rs.learners:
        for noise in rs.noise_levels:
            base = {d: rs.mean_accuracy(d, learner, baseline, noise) for d in datasets}
            for method in rs.methods:
                acc = {d: rs.mean_accuracy(d, learner, method, noise) for d in datasets}
                for d, v in acc.items():
                    if v is None:
                        missing.append((d, learner, method, noise))
                have = [d for d in datasets if acc[d] is not None]
                row = {"learner": learner, "noise": noise, "method": method,
                       "mean_accuracy": _pct(sum(acc[d] for d in have) / len(have)) if have else "",
                       "n_datasets": len(have), "g": "", "e": "", "l": "", "W": "", "p": "", "mark": ""}
                paired = [d for d in have if base[d] is not None]
                if method != baseline and paired:
                    a = [acc[d] for d in paired]
                    b = [base[d] for d in paired]
                    g, e, l = gel_counts(b, a)
                    res = wilcoxon_signed_ranks(a, b)
                    mark = ""
                    if not res.no_information and res.pvalue < alpha:
                        mark = BETTER if res.w_plus > res.w_minus else WORSE
                    row.update(g=g, e=e, l=l, W=f"{res.statistic:g}", p=f"{res.pvalue:.4f}", mark=mark)
                rows.append(row)
    return rows, missing


def _noise_label(noise: float) -> str:
    return f"{100 * noise:g}%"


def render_report(rs: ResultsStore, baseline: str = "orig", alpha: float = ALPHA) -> Report:
    if baseline not in rs.methods:
        raise ValueError(f"baseline method {baseline!r} not in results")
    rows, missing = _summary_rows(rs, baseline, alpha)
    by_key = {(r["learner"], r["noise"], r["method"]): r for r in rows}
    noises = rs.noise_levels
    out = ["# Results", "",
           f"Mean test accuracy (%) over {len(rs.datasets)} dataset(s): {', '.join(rs.datasets)}. "
           f"Baseline: `{baseline}`. g,e,l counts datasets where the baseline is greater, equal or less. "
           f"{BETTER} marks a method significantly more accurate than the baseline and {WORSE} "
           f"significantly less accurate (Wilcoxon signed-ranks, alpha = {alpha}).", ""]
    for learner in rs.learners:
        out += [f"## {learner}", "",
                "| method | " + " | ".join(_noise_label(n) for n in noises) + " |",
                "|---|" + "---|" * len(noises)]
        for method in rs.methods:
            cells = []
            for n in noises:
                r = by_key[(learner, n, method)]
                cells.append((r["mean_accuracy"] or "-") + (f" {r['mark']}" if r["mark"] else ""))
            out.append(f"| {method} | " + " | ".join(cells) + " |")
            if method != baseline:
                gel = [f"{by_key[(learner, n, method)]['g']},{by_key[(learner, n, method)]['e']},"
                       f"{by_key[(learner, n, method)]['l']}" if by_key[(learner, n, method)]["p"] else "-"
                       for n in noises]
                pw = [f"{by_key[(learner, n, method)]['p']} (W={by_key[(learner, n, method)]['W']})"
                      if by_key[(learner, n, method)]["p"] else "-" for n in noises]
                out.append("| g,e,l | " + " | ".join(gel) + " |")
                out.append("| p | " + " | ".join(pw) + " |")
        out.append("")
    failed = [r for r in rs.records() if not r.ok]
    if missing or failed:
        out += ["## Notes", ""]
        for d, learner, method, noise in missing:
            out.append(f"- no successful run for {learner}/{method} on {d} at {_noise_label(noise)} noise")
        if failed:
            out.append(f"- {len(failed)} failed cell(s); reasons are listed in results.csv")
        out.append("")
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({**r, "noise": repr(float(r["noise"]))})
    return Report("\n".join(out), buf.getvalue(), rows, missing)
