"""Image-to-label pipeline: wavelet features feeding a trained SVM.

The feature settings (level, wavelet family, band set, optional
standardization) travel inside the model's ``pipeline`` field so that a
saved model can classify raw images on its own.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .dwt import Family, filter_coefficients
from .features import BandSet, Standardizer, feature_matrix, feature_schema
from .labels import Label
from .svm import SvmModel, TrainConfig, train


def train_pipeline(images: Sequence, labels: Sequence, level: int, config: TrainConfig,
                   family: "Family | str" = Family.HAAR,
                   bands: "BandSet | str" = BandSet.ALL,
                   standardize: bool = False) -> SvmModel:
    family, bands = Family.parse(family), BandSet(bands)
    X = feature_matrix(images, level, filter_coefficients(family), bands)
    pipeline = {"level": level, "filter": family.value, "bands": bands.value,
                "standardizer": None}
    if standardize:
        sc = Standardizer.fit(X)
        X = sc.transform(X)
        pipeline["standardizer"] = sc.to_dict()
    return train(X, labels, config, feature_schema(level, bands), pipeline)


def model_features(model: SvmModel, images: Sequence) -> np.ndarray:
    p = model.pipeline
    if not p:
        raise ValueError("model carries no feature pipeline settings")
    X = feature_matrix(images, int(p["level"]), filter_coefficients(p["filter"]),
                       BandSet(p["bands"]))
    if p.get("standardizer"):
        X = Standardizer.from_dict(p["standardizer"]).transform(X)
    return X


def classify(model: SvmModel, image) -> tuple[Label, float]:
    value = float(model.decision_values(model_features(model, [image]))[0])
    return Label.from_sign(value), value


def classify_many(model: SvmModel, images: Sequence) -> list[Label]:
    if not images:
        return []
    return model.predict_many(model_features(model, images))
