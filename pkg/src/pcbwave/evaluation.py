"""Confusion matrices, accuracy and the (sigma, cost, level) grid search."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dwt import FilterPair, filter_coefficients
from .errors import EmptyInput, LengthMismatch, PcbwaveError
from .features import BandSet, Standardizer, feature_matrix
from .labels import Label
from .svm import TrainConfig, train

log = logging.getLogger(__name__)

__all__ = [
    "ConfusionMatrix",
    "confusion",
    "accuracy",
    "format_percent",
    "format_confusion",
    "CellResult",
    "GridRow",
    "GridResult",
    "grid_search",
    "format_grid",
    "grid_to_csv",
    "accuracy_table",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are actual classes, columns predicted classes; "positive" means true defect."""

    tp: int  # true defect predicted true
    fn: int  # true defect predicted pseudo
    fp: int  # pseudo defect predicted true
    tn: int  # pseudo defect predicted pseudo

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def true_rate(self) -> float:
        """Percent of actual true defects classified correctly."""
        n = self.tp + self.fn
        return 100.0 * self.tp / n if n else float("nan")

    @property
    def pseudo_rate(self) -> float:
        n = self.fp + self.tn
        return 100.0 * self.tn / n if n else float("nan")

    def swapped(self) -> "ConfusionMatrix":
        return ConfusionMatrix(self.tn, self.fp, self.fn, self.tp)


def _label(v) -> Label:
    if isinstance(v, Label):
        return v
    if isinstance(v, str):
        return Label(v)
    return Label.from_sign(v)


def confusion(predictions: Sequence, labels: Sequence) -> ConfusionMatrix:
    if len(predictions) != len(labels):
        raise LengthMismatch(f"{len(predictions)} predictions for {len(labels)} labels")
    if not labels:
        raise EmptyInput("cannot tally an empty evaluation set")
    tp = fn = fp = tn = 0
    for p, t in zip(predictions, labels):
        p, t = _label(p), _label(t)
        if t is Label.TRUE:
            if p is Label.TRUE:
                tp += 1
            else:
                fn += 1
        elif p is Label.TRUE:
            fp += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fn, fp, tn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyInput("accuracy of an empty confusion matrix")
    return 100.0 * (cm.tp + cm.tn) / cm.total


def format_percent(value: float) -> str:
    return f"{value:.2f}%"


def format_confusion(cm: ConfusionMatrix, level: "int | None" = None) -> str:
    title = "CONFUSION MATRIX"
    if level is not None:
        title += f" FOR {level}-LEVEL DECOMPOSITION"
    header = ("", "True defects", "Pseudo defects", "Correct Classifications")
    rows = [
        ("True defects", str(cm.tp), str(cm.fn), format_percent(cm.true_rate)),
        ("Pseudo defects", str(cm.fp), str(cm.tn), format_percent(cm.pseudo_rate)),
    ]
    widths = [max(len(r[k]) for r in [header, *rows]) for k in range(4)]
    lines = [title]
    for r in [header, *rows]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    lines.append(f"Overall accuracy: {format_percent(accuracy(cm))}")
    return "\n".join(lines) + "\n"


# -- grid search -------------------------------------------------------------

@dataclass(frozen=True)
class CellResult:
    accuracy: float
    matrix: ConfusionMatrix


@dataclass(frozen=True)
class GridRow:
    sigma: float
    cost: float
    cells: dict  # level -> CellResult; levels whose training failed are absent


@dataclass(frozen=True)
class GridResult:
    levels: tuple[int, ...]
    rows: tuple[GridRow, ...]
    failures: tuple[str, ...] = field(default=())

    def best(self) -> "tuple[float, float, int, float] | None":
        """(sigma, cost, level, accuracy) of the first cell reaching the maximum accuracy."""
        found = None
        for row in self.rows:
            for lv in self.levels:
                cell = row.cells.get(lv)
                if cell is not None and (found is None or cell.accuracy > found[3]):
                    found = (row.sigma, row.cost, lv, cell.accuracy)
        return found


def _run_cell(task):
    sigma, cost, level, Xtr, ytr, Xte, yte, tol, max_passes = task
    try:
        model = train(Xtr, ytr, TrainConfig(sigma, cost, tol, max_passes))
    except PcbwaveError as exc:
        return None, f"sigma={sigma:g} c={cost:g} level={level}: {exc}"
    cm = confusion(model.predict_many(Xte), yte)
    return CellResult(accuracy(cm), cm), None


def _level_features(train_set, test_set, level, filt, bands, standardize):
    Xtr = feature_matrix([s.image for s in train_set], level, filt, bands)
    Xte = feature_matrix([s.image for s in test_set], level, filt, bands)
    if standardize:
        sc = Standardizer.fit(Xtr)
        Xtr, Xte = sc.transform(Xtr), sc.transform(Xte)
    return Xtr, Xte


def grid_search(train_set, test_set, sigmas: Iterable[float] = (), costs: Iterable[float] = (),
                levels: Iterable[int] = (1, 2, 3), filt: "FilterPair | None" = None, *,
                pairs: "Sequence[tuple[float, float]] | None" = None,
                bands: "BandSet | str" = BandSet.ALL, standardize: bool = False,
                kkt_tolerance: float = 1e-3, max_passes: int = 10_000,
                jobs: int = 1) -> GridResult:
    """Train and test one SVM per (sigma, cost, level) cell.

    Without ``pairs`` the rows are the Cartesian product of ``sigmas`` and
    ``costs`` sorted by (sigma, cost); with ``pairs`` the rows follow the
    given order, which is how a table with hand-picked rows is reproduced.
    """
    filt = filt or filter_coefficients()
    levels = tuple(levels)
    if pairs is None:
        pairs = sorted((float(s), float(c)) for s in sigmas for c in costs)
    pairs = [(float(s), float(c)) for s, c in pairs]
    if not pairs or not levels:
        raise EmptyInput("grid needs at least one (sigma, cost) pair and one level")
    if not test_set:
        raise EmptyInput("grid needs a non-empty test set")
    ytr = [s.label for s in train_set]
    yte = [s.label for s in test_set]
    feats = {lv: _level_features(train_set, test_set, lv, filt, bands, standardize)
             for lv in levels}
    tasks = [(s, c, lv, feats[lv][0], ytr, feats[lv][1], yte, kkt_tolerance, max_passes)
             for s, c in pairs for lv in levels]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, tasks))
    else:
        outcomes = [_run_cell(t) for t in tasks]
    rows, failures = [], []
    it = iter(outcomes)
    for s, c in pairs:
        cells = {}
        for lv in levels:
            res, err = next(it)
            if err:
                log.warning("grid cell failed: %s", err)
                failures.append(err)
            else:
                cells[lv] = res
        rows.append(GridRow(s, c, cells))
    return GridResult(levels, tuple(rows), tuple(failures))


def format_grid(result: GridResult) -> str:
    header = ["sigma", "c"] + [f"{lv}-level Decomposition" for lv in result.levels]
    body = []
    for row in result.rows:
        cells = [format_percent(row.cells[lv].accuracy) if lv in row.cells else "-"
                 for lv in result.levels]
        body.append([f"{row.sigma:g}", f"{row.cost:g}"] + cells)
    widths = [max(len(r[k]) for r in [header, *body]) for k in range(len(header))]
    lines = ["PERFORMANCE OF CLASSIFIER FOR DIFFERENT LEVELS OF WAVELET DECOMPOSITION"]
    for r in [header, *body]:
        lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    best = result.best()
    if best is not None:
        s, c, lv, acc = best
        lines.append(f"best: sigma={s:g} c={c:g} level={lv} accuracy={format_percent(acc)}")
    for f in result.failures:
        lines.append(f"failed: {f}")
    return "\n".join(lines) + "\n"


def grid_to_csv(result: GridResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["sigma", "cost", "level", "accuracy", "tp", "fn", "fp", "tn"])
    for row in result.rows:
        for lv in result.levels:
            cell = row.cells.get(lv)
            if cell is None:
                continue
            m = cell.matrix
            w.writerow([repr(row.sigma), repr(row.cost), lv, f"{cell.accuracy:.2f}",
                        m.tp, m.fn, m.fp, m.tn])
    return buf.getvalue()


def accuracy_table(result: GridResult) -> np.ndarray:
    """Rows x levels array of accuracies with NaN for failed cells."""
    return np.array([[row.cells[lv].accuracy if lv in row.cells else np.nan
                      for lv in result.levels] for row in result.rows])
