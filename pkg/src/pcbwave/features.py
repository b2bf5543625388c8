"""Mean / standard-deviation texture features over wavelet sub-bands."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dwt import FilterPair, Subband, SubbandPyramid, decompose, filter_coefficients

__all__ = [
    "BandSet",
    "FeatureVector",
    "Standardizer",
    "subband_mean",
    "subband_sd",
    "feature_schema",
    "extract_features",
    "feature_matrix",
    "features_to_csv",
]


class BandSet(str, enum.Enum):
    ALL = "all"  # detail triples of every level plus the final approximation
    FINAL_LEVEL_ONLY = "final-level-only"  # LH_k, HL_k, HH_k, LL_k


def _coeffs(band) -> np.ndarray:
    return band.coefficients if isinstance(band, Subband) else np.asarray(band, dtype=np.float64)


def subband_mean(band) -> float:
    p = _coeffs(band)
    return float(np.sum(p) / p.size)


def subband_sd(band) -> float:
    """Population standard deviation (divisor H*W)."""
    p = _coeffs(band)
    m = np.sum(p) / p.size
    return float(np.sqrt(np.sum((p - m) ** 2) / p.size))


def _band_keys(level: int, bands: BandSet) -> list[tuple[str, int]]:
    first = 1 if bands is BandSet.ALL else level
    keys = [(kind, lv) for lv in range(first, level + 1) for kind in ("LH", "HL", "HH")]
    keys.append(("LL", level))
    return keys


def feature_schema(level: int, bands: "BandSet | str" = BandSet.ALL) -> tuple[str, ...]:
    """Column names in canonical order, e.g. ``("LH1_mean", "LH1_sd", ..., "LL2_sd")``."""
    bands = BandSet(bands)
    return tuple(f"{kind}{lv}_{stat}" for kind, lv in _band_keys(level, bands)
                 for stat in ("mean", "sd"))


@dataclass(frozen=True)
class FeatureVector:
    level: int
    values: np.ndarray
    schema: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.values)


def features_from_pyramid(pyramid: SubbandPyramid,
                          bands: "BandSet | str" = BandSet.ALL) -> FeatureVector:
    bands = BandSet(bands)
    level = pyramid.levels
    vals = []
    for kind, lv in _band_keys(level, bands):
        b = pyramid.band(kind, lv)
        vals.extend((subband_mean(b), subband_sd(b)))
    arr = np.array(vals, dtype=np.float64)
    arr.setflags(write=False)
    return FeatureVector(level, arr, feature_schema(level, bands))


def extract_features(image, level: int, filt: "FilterPair | None" = None,
                     bands: "BandSet | str" = BandSet.ALL) -> FeatureVector:
    if level not in (1, 2, 3):
        raise ValueError(f"feature level must be 1, 2 or 3, got {level}")
    pyramid = decompose(image, level, filt or filter_coefficients())
    return features_from_pyramid(pyramid, bands)


def feature_matrix(images: Iterable, level: int, filt: "FilterPair | None" = None,
                   bands: "BandSet | str" = BandSet.ALL) -> np.ndarray:
    rows = [extract_features(img, level, filt, bands).values for img in images]
    if not rows:
        return np.zeros((0, len(feature_schema(level, bands))))
    return np.vstack(rows)


@dataclass(frozen=True)
class Standardizer:
    """Per-column z-score transform fitted on training features."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        # constant columns (e.g. detail means on flat images) pass through unscaled
        scale = np.where(scale > 0, scale, 1.0)
        return cls(mean, scale)

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "scale": [float(v) for v in self.scale]}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.array(d["mean"], dtype=np.float64), np.array(d["scale"], dtype=np.float64))


def features_to_csv(schema: Sequence[str], rows: np.ndarray, labels: Sequence[str]) -> str:
    """Render feature rows as CSV text with the label column last."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(schema) + ["label"])
    for row, label in zip(rows, labels):
        writer.writerow([repr(float(v)) for v in row] + [label])
    return buf.getvalue()
