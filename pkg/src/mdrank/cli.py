"""``mdrank`` command line.

Exit codes: 0 success, 1 I/O error, 2 invalid data or failed fit, 64 usage error.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .data import DataError, format_features, format_predictions, format_truth, join, parse_features, parse_predictions, parse_truth
from .gda import DISPLAY_NAMES, RIDGE_SCALE, VARIANTS, fit_gda, score_dataset
from .measures import MEASURES, measure_report, roc_curve
from .ranking import cross_ranking_table, rank_agreements, rank_stability
from .report import EvaluationReport, render_roc_plot, render_roc_text, render_variant_grid
from .resampling import bootstrap_measure, cv_scores
from .synth import BinormalSpec, SynthChallengeSpec, binormal_scores, challenge_field, heteroscedastic_features

EXIT_OK, EXIT_IO, EXIT_DATA, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("MDRANK_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"MDRANK_SEED must be an integer, got {env!r}") from None
    return 0


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_set(pred_path, truth, allow_partial=False):
    pred_path = Path(pred_path)
    system = pred_path.stem
    try:
        preds = parse_predictions(_read(pred_path), system)
        return join(preds, truth, system, allow_partial)
    except DataError as exc:
        raise DataError(f"{pred_path}: {exc}") from None


def _load_truth(path):
    try:
        return parse_truth(_read(path))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_evaluate(args) -> int:
    seed = _seed(args.seed)
    truth = _load_truth(args.truth)
    ps = _load_set(args.predictions, truth, args.partial)
    rep = measure_report(ps, convention=args.convention)
    report = EvaluationReport.new(
        "evaluate", seed, [rep], ps.n_pos, ps.n_neg, args.convention,
        predictions=Path(args.predictions).name, truth=Path(args.truth).name,
    )
    if args.bootstrap:
        report.resampling[ps.system_id] = {
            m: bootstrap_measure(ps, m, args.bootstrap, seed, n_jobs=args.jobs) for m in MEASURES
        }
    _emit(report.to_json() if args.format == "json" else report.to_csv(), args.out)
    return EXIT_OK


def cmd_rank(args) -> int:
    seed = _seed(args.seed)
    truth_path = Path(args.truth).resolve()
    truth = _load_truth(args.truth)
    sub_dir = Path(args.submissions)
    if not sub_dir.is_dir():
        raise FileNotFoundError(f"submissions directory not found: {sub_dir}")
    files = sorted(p for p in sub_dir.glob("*.csv") if p.resolve() != truth_path)
    if not files:
        raise DataError(f"no *.csv submissions in {sub_dir}")
    measures = args.measures.split(",") if args.measures else list(MEASURES)
    unknown = [m for m in measures if m not in MEASURES]
    if unknown:
        raise UsageError(f"unknown measure(s) {', '.join(unknown)}; choose from {', '.join(MEASURES)}")
    sets = []
    for f in files:
        try:
            sets.append(_load_set(f, truth, args.partial))
        except DataError as exc:
            raise DataError(f"system {f.stem!r}: {exc}") from None
    reports = [measure_report(ps) for ps in sets]
    table = cross_ranking_table(reports, measures)
    report = EvaluationReport.new(
        "rank", seed, reports, sets[0].n_pos, sets[0].n_neg, truth=Path(args.truth).name,
        n_systems=len(sets),
    )
    report.ranking = table
    report.agreement = rank_agreements(table)
    if args.stability:
        report.stability = [rank_stability(sets, m, args.stability, seed, args.jobs) for m in measures]
    report.tables["ranking"] = table.render()
    _emit(report.to_json(), args.out)
    if args.out:
        print(table.render())
    return EXIT_OK


def cmd_gda(args) -> int:
    seed = _seed(args.seed)
    train = parse_features(_read(args.train))
    variants = list(VARIANTS) if args.variant == "all" else [v.strip().lower() for v in args.variant.split(",")]
    for v in variants:
        if v not in VARIANTS:
            raise UsageError(f"unknown variant {v!r}; choose from {', '.join(VARIANTS)} or 'all'")
    reports, curves, ridges = [], [], {}
    if args.test:
        test = parse_features(_read(args.test))
        if test.d != train.d:
            raise DataError(f"test has {test.d} features, train has {train.d}")
        protocol = "train/test"
    else:
        protocol = f"{args.cv}-fold stratified cross-validation, pooled held-out scores"
    for v in variants:
        name = DISPLAY_NAMES[v]
        if args.test:
            model = fit_gda(train, v)
            ps = score_dataset(model, test, args.sweep, system_id=name)
            ridges[name] = list(model.ridge)
            if args.model_out and len(variants) == 1:
                Path(args.model_out).write_text(model.to_json(), encoding="utf-8")
        else:
            pooled, _, _ = cv_scores(train, v, args.cv, seed, args.sweep)
            ps = pooled.with_scores(pooled.scores, system_id=name)
        reports.append(measure_report(ps))
        curves.append(roc_curve(ps))
    evaluated = test if args.test else train
    report = EvaluationReport.new(
        "gda", seed, reports, evaluated.n_pos, evaluated.n_neg,
        sweep=args.sweep, protocol=protocol, ridge_scale=RIDGE_SCALE,
        **({"ridge": ridges} if ridges else {}),
    )
    report.tables["variants"] = render_variant_grid(reports)
    if args.plot:
        render_roc_plot(curves, args.plot, title=f"{args.sweep} sweep")
    _emit(report.to_json(), args.out)
    if args.out:
        print(report.tables["variants"])
    return EXIT_OK


def cmd_synth(args) -> int:
    seed = _seed(args.seed)
    if args.pos < 1 or args.neg < 1:
        raise UsageError("--pos and --neg must be >= 1")
    if not args.sigma > 0:
        raise UsageError("--sigma must be > 0")
    out = Path(args.out)
    if args.features:
        ds = heteroscedastic_features(args.pos, args.neg, args.dim, args.mu, seed)
        out.write_text(format_features(ds), encoding="utf-8")
        return EXIT_OK
    if args.systems:
        field = challenge_field(SynthChallengeSpec(args.systems, args.pos, args.neg, seed=seed))
        out.mkdir(parents=True, exist_ok=True)
        for ps in field:
            (out / f"{ps.system_id}.csv").write_text(format_predictions(ps), encoding="utf-8")
        truth_out = Path(args.truth_out) if args.truth_out else out.with_name(out.name + "_truth.csv")
        truth_out.write_text(format_truth(field[0]), encoding="utf-8")
        return EXIT_OK
    ps = binormal_scores(BinormalSpec(args.pos, args.neg, args.mu, args.sigma, seed), as_probability=True)
    truth_out = Path(args.truth_out) if args.truth_out else out.with_name(out.stem + "_truth" + out.suffix)
    out.write_text(format_predictions(ps), encoding="utf-8")
    truth_out.write_text(format_truth(ps), encoding="utf-8")
    return EXIT_OK


def cmd_plot(args) -> int:
    truth = _load_truth(args.truth)
    curves = [roc_curve(_load_set(p, truth)) for p in args.predictions]
    if args.out:
        render_roc_plot(curves, args.out)
    else:
        print(render_roc_text(curves))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdrank", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"mdrank {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("evaluate", help="measures for one prediction file")
    e.add_argument("--predictions", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--bootstrap", type=int, default=0, metavar="N")
    e.add_argument("--seed", type=int)
    e.add_argument("--convention", choices=("at-least", "interpolate"), default="at-least")
    e.add_argument("--format", choices=("json", "csv"), default="json")
    e.add_argument("--partial", action="store_true", help="allow truth items without a prediction")
    e.add_argument("--jobs", type=int, default=1)
    e.add_argument("--out")
    e.set_defaults(func=cmd_evaluate)

    r = sub.add_parser("rank", help="rank every submission in a directory")
    r.add_argument("--submissions", required=True)
    r.add_argument("--truth", required=True)
    r.add_argument("--measures", help=f"comma-separated subset of {','.join(MEASURES)}")
    r.add_argument("--stability", type=int, default=0, metavar="N")
    r.add_argument("--seed", type=int)
    r.add_argument("--partial", action="store_true")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--out")
    r.set_defaults(func=cmd_rank)

    g = sub.add_parser("gda", help="fit and evaluate Gaussian discriminant classifiers")
    g.add_argument("--train", required=True)
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--test")
    src.add_argument("--cv", type=int, metavar="K")
    g.add_argument("--variant", default="qda", help="lda, qda, dlda, dqda, a comma list, or 'all'")
    g.add_argument("--sweep", choices=("prior", "threshold"), default="prior")
    g.add_argument("--seed", type=int)
    g.add_argument("--model-out")
    g.add_argument("--plot", metavar="SVG")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gda)

    s = sub.add_parser("synth", help="write a synthetic cohort")
    s.add_argument("--pos", type=int, default=75)
    s.add_argument("--neg", type=int, default=304)
    s.add_argument("--mu", type=float, default=1.0, help="malignant mean (feature mode: class separation)")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--truth-out")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--features", action="store_true", help="write a feature file instead of scores")
    mode.add_argument("--systems", type=int, default=0, metavar="N", help="write N submissions into directory --out")
    s.add_argument("--dim", type=int, default=4)
    s.set_defaults(func=cmd_synth)

    pl = sub.add_parser("plot", help="ROC curves as SVG, or as text when --out is omitted")
    pl.add_argument("--predictions", nargs="+", required=True)
    pl.add_argument("--truth", required=True)
    pl.add_argument("--out")
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mdrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        name = getattr(exc, "filename", None)
        print(f"mdrank: I/O error: {name + ': ' if name else ''}{exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"mdrank: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
