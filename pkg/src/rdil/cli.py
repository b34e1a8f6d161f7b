"""Command-line interface: ``rdil estimate|filter|train|predict|experiment|cod``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 degenerate input.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys

import numpy as np
import yaml

from .data import load_dataset
from .detrimentality import (
    DetrimentalityEstimate,
    EnsembleSpec,
    default_ensemble,
    estimate_biased,
    estimate_ensemble,
    read_weights,
)
from .errors import DegenerateError, ParseError, RDILError, SchemaMismatchError
from .filters import biased_filter, ensemble_filter, renn
from .harness import ConfigError, load_config, render_report, run_experiment
from .learners import KINDS, LearnerSpec, load_model, save_model, train
from .meta import agglomerative_cluster, cod_matrix, cut_dendrogram
from .pwem import EMFailure, pwem_weights

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DEGENERATE = 0, 1, 2, 3

logger = logging.getLogger("rdil")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load(args):
    try:
        return load_dataset(args.data, class_column=args.class_column)
    except FileNotFoundError as exc:
        raise ParseError(f"cannot read {args.data}: {exc.strerror}") from exc


def _ensemble(text: str, folds: int, seed: int) -> EnsembleSpec:
    """``default``, a comma-separated list of kinds, or a YAML/JSON file of learner specs."""
    if text == "default":
        return default_ensemble(folds, seed)
    if os.path.exists(text):
        with open(text, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
        members = raw.get("members", raw) if isinstance(raw, dict) else raw
    else:
        members = [k.strip() for k in text.split(",") if k.strip()]
    try:
        return EnsembleSpec(tuple(LearnerSpec.from_dict(m) for m in members), folds, seed)
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad ensemble {text!r}: {exc}") from exc


def _learner(kind: str, params: str | None, seed: int) -> LearnerSpec:
    try:
        p = json.loads(params) if params else {}
        return LearnerSpec(kind, p, seed)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_estimate(args):
    d = _load(args)
    if args.pwem:
        est = pwem_weights(d, args.seed)
    elif args.biased:
        est = estimate_biased(d, _learner(args.biased, args.params, args.seed), args.folds, args.voting,
                              args.seed, args.n_jobs)
    else:
        est = estimate_ensemble(d, _ensemble(args.ensemble, args.folds, args.seed), args.voting, args.n_jobs)
    est.save_csv(args.out)
    print(f"wrote {len(est)} weights to {args.out} (mean {est.weights.mean():.4f})")


def cmd_filter(args):
    d = _load(args)
    if args.method == "renn":
        res = renn(d)
    elif args.method == "biased":
        res = biased_filter(d, _learner(args.learner, args.params, args.seed), args.folds, args.seed, args.n_jobs)
    else:
        if args.weights:
            with open(args.weights, encoding="utf-8") as fh:
                est = DetrimentalityEstimate.from_csv(fh.read())
            if len(est) != len(d):
                raise ParseError(f"{args.weights} has {len(est)} rows, dataset has {len(d)}")
        else:
            est = estimate_ensemble(d, _ensemble(args.ensemble, args.folds, args.seed), "delta", args.n_jobs)
        res = ensemble_filter(est, args.threshold, d.y)
    res.save_csv(args.out)
    msg = f"kept {len(res.retained_ids)} of {res.n}, removed {len(res.removed_ids)}"
    if res.rounds:
        msg += f" in {res.rounds} round(s)"
    print(msg)
    if res.flagged:
        print(f"warning: {res.note}", file=sys.stderr)


def cmd_train(args):
    d = _load(args)
    w = None
    if args.weights:
        w = read_weights(args.weights)
        if len(w) != len(d):
            raise ParseError(f"{args.weights} has {len(w)} weights, dataset has {len(d)}")
    model = train(_learner(args.learner, args.params, args.seed), d, w)
    save_model(model, args.model_out)
    acc = float(np.mean(model.predict(d.X) == d.y))
    print(f"trained {args.learner} on {len(d)} instances (training accuracy {acc:.4f}); saved {args.model_out}")


def cmd_predict(args):
    model = load_model(args.model)
    d = _load(args)
    if d.schema.attributes != model.schema.attributes:
        raise SchemaMismatchError("dataset attributes differ from the model's training schema")
    scores = model.class_scores(d.X)
    pred = np.argmax(scores, axis=1)
    names = model.schema.class_names
    lines = ["instance_id,predicted," + ",".join(f"score_{c}" for c in names)]
    for i, (p, s) in enumerate(zip(pred, scores)):
        lines.append(f"{i},{names[p]}," + ",".join(repr(float(v)) for v in s))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if model.schema.class_attribute == d.schema.class_attribute:
        print(f"accuracy {np.mean(pred == d.y):.4f}", file=sys.stderr)


def cmd_experiment(args):
    cfg = load_config(args.config)
    if args.oracle_threshold:
        cfg = dataclasses.replace(cfg, oracle_threshold=True)
    try:
        datasets = [ref.load() for ref in cfg.datasets]
    except FileNotFoundError as exc:
        raise ParseError(f"cannot read dataset: {exc}") from exc
    rs = run_experiment(cfg, n_jobs=args.n_jobs, datasets=datasets)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "results.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rs.to_csv())
    records = rs.records()
    ok = [r for r in records if r.ok]
    if not ok:
        raise DegenerateError("every experiment cell failed")
    if args.baseline not in cfg.methods:
        raise UsageError(f"baseline {args.baseline!r} is not among the configured methods")
    rep = render_report(rs, args.baseline)
    with open(os.path.join(args.out, "report.md"), "w", encoding="utf-8") as fh:
        fh.write(rep.markdown)
    with open(os.path.join(args.out, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rep.csv)
    print(f"{len(records)} records ({len(records) - len(ok)} failed) written to {args.out}")


def cmd_cod(args):
    learners = [k.strip() for k in args.learners.split(",") if k.strip()]
    try:
        specs = [LearnerSpec(k) for k in learners]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not os.path.isdir(args.data_dir):
        raise ParseError(f"{args.data_dir} is not a directory")
    files = sorted(f for f in os.listdir(args.data_dir) if f.lower().endswith((".arff", ".csv")))
    if not files:
        raise ParseError(f"no .arff or .csv files in {args.data_dir}")
    datasets = [load_dataset(os.path.join(args.data_dir, f)) for f in files]
    m = cod_matrix(datasets, specs, args.seed)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write(m.to_csv())
    dd = agglomerative_cluster(m, args.linkage)
    print(dd.to_text())
    if args.newick:
        with open(args.newick, "w", encoding="utf-8") as fh:
            fh.write(dd.newick() + "\n")
    if args.cut is not None:
        for group in cut_dendrogram(dd, args.cut):
            print("cluster: " + ", ".join(group))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rdil", description="Detrimental-instance weighting and noise filtering.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(sp):
        sp.add_argument("--data", required=True, help="ARFF or CSV file")
        sp.add_argument("--class-column", default=None, help="CSV label column (default: last)")

    sp = sub.add_parser("estimate", help="estimate per-instance weights")
    data_args(sp)
    sp.add_argument("--ensemble", default="default",
                    help="'default', comma-separated learner kinds, or a YAML file of learner specs")
    sp.add_argument("--biased", choices=KINDS, help="estimate with this single learner instead")
    sp.add_argument("--params", help="JSON hyperparameters for --biased")
    sp.add_argument("--pwem", action="store_true", help="pair-wise EM weights instead")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--voting", choices=("delta", "score"), default="delta")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("filter", help="filter likely mislabeled instances")
    data_args(sp)
    sp.add_argument("--method", choices=("ensemble", "biased", "renn"), required=True)
    sp.add_argument("--threshold", type=float, default=0.5, help="ensemble vote fraction that removes")
    sp.add_argument("--weights", help="reuse an estimate CSV for the ensemble filter")
    sp.add_argument("--ensemble", default="default")
    sp.add_argument("--learner", choices=KINDS, default="tree_c45", help="learner for the biased filter")
    sp.add_argument("--params", help="JSON hyperparameters for --learner")
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-jobs", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_filter)

    sp = sub.add_parser("train", help="train a (weighted) model")
    data_args(sp)
    sp.add_argument("--learner", choices=KINDS, required=True)
    sp.add_argument("--params", help="JSON hyperparameters")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--weights", help="weight CSV from 'rdil estimate'")
    sp.add_argument("--model-out", required=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("predict", help="apply a saved model")
    data_args(sp)
    sp.add_argument("--model", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("experiment", help="run a noise-sweep experiment from a config file")
    sp.add_argument("--config", required=True)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--n-jobs", type=int, default=1)
    sp.add_argument("--baseline", default="orig")
    sp.add_argument("--oracle-threshold", action="store_true",
                    help="pick filter thresholds by test accuracy (reproduction only)")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("cod", help="classifier output difference between learners")
    sp.add_argument("--data-dir", required=True)
    sp.add_argument("--learners", required=True, help="comma-separated learner kinds")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--linkage", choices=("average", "single", "complete"), default="average")
    sp.add_argument("--cut", type=float, help="print the clusters below this height")
    sp.add_argument("--newick", help="write the dendrogram in Newick format")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_cod)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"rdil: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateError, EMFailure) as exc:
        print(f"rdil: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ParseError, SchemaMismatchError, OSError) as exc:
        print(f"rdil: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except RDILError as exc:
        print(f"rdil: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"rdil: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
