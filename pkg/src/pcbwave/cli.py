"""Command-line entry point.

Exit status: 0 on success, 1 on usage errors, 2 on data errors.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import dataset, evaluation, features, pipeline, svm
from .dwt import Family, decompose, filter_coefficients
from .errors import PcbwaveError
from .features import BandSet

log = logging.getLogger("pcbwave")

# the nine reference (sigma, c) rows of the published results table, in its order
PUBLISHED_PAIRS = ((0.01, 3), (0.01, 5), (0.01, 9), (0.01, 11), (0.01, 15),
               (0.02, 9), (0.06, 9), (0.06, 1), (0.15, 3))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0: {text!r}")
    return v


def _float_list(text: str) -> list[float]:
    return [_positive_float(t) for t in text.split(",") if t.strip()]


def _level_list(text: str) -> list[int]:
    try:
        levels = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None
    if not levels or any(lv not in (1, 2, 3) for lv in levels):
        raise argparse.ArgumentTypeError("levels must be drawn from 1,2,3")
    return levels


def _pair_list(text: str) -> list[tuple[float, float]]:
    if text.strip().lower() == "published":
        return [tuple(map(float, p)) for p in PUBLISHED_PAIRS]
    pairs = []
    for item in text.split(","):
        if not item.strip():
            continue
        s, sep, c = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"pair {item!r} is not sigma:cost")
        pairs.append((_positive_float(s), _positive_float(c)))
    return pairs


def _add_feature_opts(p, level_default=2):
    p.add_argument("--level", type=int, choices=(1, 2, 3), default=level_default,
                   help="wavelet decomposition level")
    p.add_argument("--filter", default="haar", choices=[f.value for f in Family],
                   help="wavelet family")
    p.add_argument("--bands", default=BandSet.ALL.value, choices=[b.value for b in BandSet],
                   help="sub-bands feeding the features")


def _add_split_opts(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-true", type=_nonneg_int, default=26)
    p.add_argument("--train-pseudo", type=_nonneg_int, default=24)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcbwave",
                     description="True vs pseudo PCB defect classification with wavelet features and an RBF SVM.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("decompose", help="write every sub-band of an image as PGM + CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--filter", default="haar", choices=[f.value for f in Family])
    p.add_argument("--out", required=True)
    p.add_argument("--no-plot", action="store_true", help="skip the pyramid.png figure")

    p = sub.add_parser("extract", help="write a feature CSV for a dataset")
    p.add_argument("--data", required=True)
    _add_feature_opts(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic true/pseudo dataset")
    p.add_argument("--n", type=int, default=25, help="images per class")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train an SVM on the training split")
    p.add_argument("--data", required=True)
    _add_feature_opts(p)
    _add_split_opts(p)
    p.add_argument("--sigma", type=_positive_float, required=True)
    p.add_argument("--cost", type=_positive_float, required=True)
    p.add_argument("--standardize", action="store_true", help="z-score features on the training split")
    p.add_argument("--tol", type=_positive_float, default=1e-3, help="KKT tolerance")
    p.add_argument("--max-passes", type=int, default=10_000)
    p.add_argument("--model", required=True)

    p = sub.add_parser("predict", help="classify one image")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)

    p = sub.add_parser("eval", help="confusion matrix of a model on the test split")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    _add_split_opts(p)
    p.add_argument("--all", action="store_true", help="evaluate every sample, not just the test split")
    p.add_argument("--report", help="also write the report text here")
    p.add_argument("--plot", help="write a confusion-matrix figure (PNG)")

    p = sub.add_parser("grid", help="(sigma, cost, level) grid search")
    p.add_argument("--data", required=True)
    p.add_argument("--sigmas", type=_float_list)
    p.add_argument("--costs", type=_float_list)
    p.add_argument("--pairs", type=_pair_list,
                   help="explicit sigma:cost rows in order, or 'published' for the nine reference rows")
    p.add_argument("--levels", type=_level_list, default=[1, 2, 3])
    p.add_argument("--filter", default="haar", choices=[f.value for f in Family])
    p.add_argument("--bands", default=BandSet.ALL.value, choices=[b.value for b in BandSet])
    _add_split_opts(p)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--tol", type=_positive_float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=10_000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--report", help="also write the report text here")
    p.add_argument("--csv", help="write sigma,cost,level,accuracy,tp,fn,fp,tn rows here")
    p.add_argument("--plot", help="write an accuracy bar chart (PNG)")
    return parser


def _emit(text: str, report_path=None) -> None:
    sys.stdout.write(text)
    if report_path:
        Path(report_path).write_text(text, encoding="utf-8")


def _split(samples, args):
    return dataset.split(samples, dataset.SplitSpec(args.train_true, args.train_pseudo, args.seed))


def cmd_decompose(args) -> None:
    img = dataset.load_pgm(args.input)
    pyr = decompose(img, args.levels, filter_coefficients(args.filter))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    from .plotting import plot_pyramid, rescale_to_byte

    with open(out / "coefficients.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["band", "row", "col", "value"])
        for band in pyr.bands():
            dataset.write_pgm(rescale_to_byte(band.coefficients), out / f"{band.name}.pgm")
            for (r, c), v in np.ndenumerate(band.coefficients):
                w.writerow([band.name, r, c, repr(float(v))])
    if not args.no_plot:
        plot_pyramid(pyr, out / "pyramid.png")
    print(f"wrote {3 * pyr.levels + 1} sub-bands to {out}")


def cmd_extract(args) -> None:
    samples = dataset.load_dataset(args.data)
    filt = filter_coefficients(args.filter)
    X = features.feature_matrix([s.image for s in samples], args.level, filt, args.bands)
    text = features.features_to_csv(features.feature_schema(args.level, args.bands), X,
                                    [s.label.value for s in samples])
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(samples)} feature rows to {args.out}")


def cmd_synth(args) -> None:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    samples = dataset.synth_generate(args.n, args.size, args.seed)
    dataset.save_dataset(samples, args.out)
    print(f"wrote {len(samples)} images to {args.out}")


def cmd_train(args) -> None:
    samples = dataset.load_dataset(args.data)
    train_set, _ = _split(samples, args)
    config = svm.TrainConfig(args.sigma, args.cost, args.tol, args.max_passes)
    model = pipeline.train_pipeline([s.image for s in train_set], [s.label for s in train_set],
                                    args.level, config, args.filter, args.bands, args.standardize)
    svm.save_model(model, args.model)
    preds = pipeline.classify_many(model, [s.image for s in train_set])
    cm = evaluation.confusion(preds, [s.label for s in train_set])
    print(f"trained on {len(train_set)} images: {len(model.dual_coefficients)} support vectors, "
          f"training accuracy {evaluation.format_percent(evaluation.accuracy(cm))}")


def cmd_predict(args) -> None:
    model = svm.load_model(args.model)
    label, value = pipeline.classify(model, dataset.load_pgm(args.input))
    print(f"{label.value}\t{value!r}")


def cmd_eval(args) -> None:
    model = svm.load_model(args.model)
    samples = dataset.load_dataset(args.data)
    test = samples if args.all else _split(samples, args)[1]
    preds = pipeline.classify_many(model, [s.image for s in test])
    cm = evaluation.confusion(preds, [s.label for s in test])
    _emit(evaluation.format_confusion(cm, model.pipeline.get("level")), args.report)
    if args.plot:
        from .plotting import plot_confusion
        plot_confusion(cm, args.plot)


def cmd_grid(args) -> None:
    if args.pairs is None and not (args.sigmas and args.costs):
        raise UsageError("grid needs --pairs or both --sigmas and --costs")
    if args.pairs is not None and (args.sigmas or args.costs):
        raise UsageError("--pairs cannot be combined with --sigmas/--costs")
    samples = dataset.load_dataset(args.data)
    train_set, test_set = _split(samples, args)
    result = evaluation.grid_search(
        train_set, test_set, args.sigmas or (), args.costs or (), args.levels,
        filter_coefficients(args.filter), pairs=args.pairs, bands=args.bands,
        standardize=args.standardize, kkt_tolerance=args.tol, max_passes=args.max_passes,
        jobs=args.jobs)
    _emit(evaluation.format_grid(result), args.report)
    if args.csv:
        Path(args.csv).write_text(evaluation.grid_to_csv(result), encoding="utf-8")
    if args.plot:
        from .plotting import plot_grid
        plot_grid(result, args.plot)


COMMANDS = {
    "decompose": cmd_decompose,
    "extract": cmd_extract,
    "synth": cmd_synth,
    "train": cmd_train,
    "predict": cmd_predict,
    "eval": cmd_eval,
    "grid": cmd_grid,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pcbwave {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (PcbwaveError, OSError, ValueError) as exc:
        print(f"pcbwave {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
