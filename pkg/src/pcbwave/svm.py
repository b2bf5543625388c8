"""Soft-margin binary SVM with a Gaussian kernel, trained by SMO.

The kernel is ``K(x, y) = exp(-||x - y||^2 / sigma^2)``.  There is no factor
of two in the denominator, so ``gamma = 1 / sigma**2`` when comparing against
libraries that use ``exp(-gamma * ||x - y||^2)``.

Training maximises the usual C-SVM dual

    sum_n a_n - 1/2 sum_nm a_n a_m t_n t_m K(x_n, x_m)
    subject to 0 <= a_n <= cost,  sum_n a_n t_n = 0

with analytic two-variable updates.  The working pair is the maximal KKT
violating pair: the index with the smallest error ``E_i = f(x_i) - t_i`` among
multipliers that may move up, and the one with the largest error among those
that may move down.  Iteration stops once ``max E_low - min E_up <= tol``,
which guarantees every training point meets its KKT condition to within
``tol`` for the bias chosen afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, ModelFormatError, NotConverged, SingleClass
from .labels import LABEL_MAP, Label

FORMAT_VERSION = 1
_TAU = 1e-12  # curvature floor for degenerate (duplicate-point) pairs

__all__ = [
    "TrainConfig",
    "SvmModel",
    "rbf_kernel",
    "gram_matrix",
    "train",
    "decision_value",
    "predict",
    "solve_dual",
    "dual_objective",
    "kkt_violations",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class TrainConfig:
    sigma: float
    cost: float
    kkt_tolerance: float = 1e-3
    max_passes: int = 10_000

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not self.cost > 0:
            raise ValueError(f"cost must be positive, got {self.cost}")
        if not self.kkt_tolerance > 0:
            raise ValueError(f"kkt_tolerance must be positive, got {self.kkt_tolerance}")
        if self.max_passes < 1:
            raise ValueError(f"max_passes must be >= 1, got {self.max_passes}")


def _as_vector(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).reshape(-1)


def rbf_kernel(x, y, sigma: float) -> float:
    x, y = _as_vector(x), _as_vector(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"kernel arguments have lengths {x.size} and {y.size}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    d = x - y
    return float(np.exp(-np.dot(d, d) / sigma ** 2))


def gram_matrix(X, Y, sigma: float) -> np.ndarray:
    """Kernel matrix ``K[i, j] = K(X[i], Y[j])``, each entry from its own difference vector."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"feature dimensions differ: {X.shape[1]} vs {Y.shape[1]}")
    diff = X[:, None, :] - Y[None, :, :]
    return np.exp(-np.einsum("ijk,ijk->ij", diff, diff) / sigma ** 2)


def _signs(labels) -> np.ndarray:
    out = []
    for t in labels:
        if isinstance(t, Label):
            out.append(t.sign)
        elif isinstance(t, str):
            out.append(Label(t).sign)
        elif t in (1, -1):
            out.append(int(t))
        else:
            raise ValueError(f"labels must be +1/-1 or Label values, got {t!r}")
    return np.array(out, dtype=np.float64)


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    dual_coefficients: np.ndarray  # a_n * t_n
    bias: float
    sigma: float
    cost: float
    support_indices: tuple[int, ...] = ()
    feature_schema: tuple[str, ...] = ()
    pipeline: dict = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.support_vectors.shape[1]

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.dimension:
            raise DimensionMismatch(
                f"model expects {self.dimension} features, got {X.shape[1]}")
        return X

    def decision_values(self, X) -> np.ndarray:
        X = self._check(X)
        return gram_matrix(X, self.support_vectors, self.sigma) @ self.dual_coefficients + self.bias

    def decision_value(self, x) -> float:
        return float(self.decision_values(_as_vector(x)[None, :])[0])

    def predict(self, x) -> Label:
        return Label.from_sign(self.decision_value(x))

    def predict_many(self, X) -> list[Label]:
        return [Label.from_sign(v) for v in self.decision_values(X)]

    def training_duals(self, n_samples: int) -> np.ndarray:
        """Full multiplier vector over the training set (zeros off the support)."""
        a = np.zeros(n_samples)
        a[list(self.support_indices)] = np.abs(self.dual_coefficients)
        return a


def decision_value(model: SvmModel, x) -> float:
    """``sum_n a_n t_n K(x, x_n) + b`` over the support vectors."""
    return model.decision_value(x)


def predict(model: SvmModel, x) -> Label:
    return model.predict(x)


def _select_pair(alpha, y, G, C):
    minus_yG = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    up_idx = np.flatnonzero(up)
    low_idx = np.flatnonzero(low)
    i = up_idx[np.argmax(minus_yG[up_idx])]
    j = low_idx[np.argmin(minus_yG[low_idx])]
    return int(i), int(j), float(minus_yG[i] - minus_yG[j])


def _bias(alpha, y, G, C) -> float:
    minus_yG = -y * G  # = t_n - f(x_n) without bias
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(np.mean(minus_yG[free]))
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
    return float((minus_yG[up].max() + minus_yG[low].min()) / 2.0)


def solve_dual(K: np.ndarray, y: np.ndarray, cost: float, tol: float = 1e-3,
               max_iter: int = 1_000_000) -> tuple[np.ndarray, float, int]:
    """SMO on a precomputed kernel matrix; returns ``(alpha, bias, iterations)``."""
    n = len(y)
    C = float(cost)
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    it = 0
    while True:
        i, j, gap = _select_pair(alpha, y, G, C)
        if gap <= tol:
            # refresh the accumulated gradient before trusting convergence
            G = Q @ alpha - 1.0
            i, j, gap = _select_pair(alpha, y, G, C)
            if gap <= tol:
                break
        if it >= max_iter:
            raise NotConverged(f"SMO stopped after {it} updates with KKT gap {gap:.3g}")
        it += 1
        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], _TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            else:
                if ni < 0:
                    ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            else:
                if nj > C:
                    nj, ni = C, C + diff
        else:
            quad = max(K[i, i] + K[j, j] - 2.0 * K[i, j], _TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            else:
                if ni < 0:
                    ni, nj = 0.0, total
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    return alpha, _bias(alpha, y, G, C), it


def train(samples, labels, config: TrainConfig, feature_schema: Sequence[str] = (),
          pipeline: "dict | None" = None) -> SvmModel:
    X = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    y = _signs(labels)
    if X.shape[0] != y.size:
        raise DimensionMismatch(f"{X.shape[0]} samples but {y.size} labels")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClass("training data must contain both true and pseudo defects")
    K = gram_matrix(X, X, config.sigma)
    alpha, b, _ = solve_dual(K, y, config.cost, config.kkt_tolerance,
                             max_iter=config.max_passes * max(len(y), 1))
    sv = np.flatnonzero(alpha > 0)
    return SvmModel(
        support_vectors=X[sv].copy(),
        dual_coefficients=alpha[sv] * y[sv],
        bias=b,
        sigma=float(config.sigma),
        cost=float(config.cost),
        support_indices=tuple(int(k) for k in sv),
        feature_schema=tuple(feature_schema),
        pipeline=dict(pipeline or {}),
    )


def dual_objective(samples, labels, duals, sigma: float) -> float:
    X = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    y = _signs(labels)
    a = _as_vector(duals)
    if not (X.shape[0] == y.size == a.size):
        raise DimensionMismatch("samples, labels and duals must have equal lengths")
    at = a * y
    return float(a.sum() - 0.5 * at @ gram_matrix(X, X, sigma) @ at)


def kkt_violations(model: SvmModel, samples, labels, tol: float = 1e-3) -> list[int]:
    """Indices of training points whose KKT condition fails by more than ``tol``."""
    X = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    y = _signs(labels)
    a = model.training_duals(len(y))
    margin = y * model.decision_values(X)
    bad = []
    for n, (an, mn) in enumerate(zip(a, margin)):
        if an == 0:
            ok = mn >= 1 - tol
        elif an >= model.cost:
            ok = mn <= 1 + tol
        else:
            ok = abs(mn - 1) <= tol
        if not ok:
            bad.append(n)
    return bad


def model_to_json(model: SvmModel) -> str:
    doc = {
        "format_version": FORMAT_VERSION,
        "sigma": model.sigma,
        "cost": model.cost,
        "bias": model.bias,
        "label_map": LABEL_MAP,
        "support_vectors": [[float(v) for v in row] for row in model.support_vectors],
        "dual_coefficients": [float(v) for v in model.dual_coefficients],
        "support_indices": list(model.support_indices),
        "feature_schema": list(model.feature_schema),
        "pipeline": model.pipeline,
    }
    return json.dumps(doc, indent=2) + "\n"


def model_from_json(text: str) -> SvmModel:
    try:
        doc = json.loads(text)
        if doc["format_version"] != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format_version {doc['format_version']}")
        if doc["label_map"] != LABEL_MAP:
            raise ModelFormatError(f"unexpected label_map {doc['label_map']}")
        sv = np.array(doc["support_vectors"], dtype=np.float64)
        coef = np.array(doc["dual_coefficients"], dtype=np.float64)
        if sv.ndim != 2 or sv.shape[0] != coef.size or coef.size == 0:
            raise ModelFormatError("support_vectors and dual_coefficients are inconsistent")
        return SvmModel(
            support_vectors=sv,
            dual_coefficients=coef,
            bias=float(doc["bias"]),
            sigma=float(doc["sigma"]),
            cost=float(doc["cost"]),
            support_indices=tuple(doc.get("support_indices", ())),
            feature_schema=tuple(doc.get("feature_schema", ())),
            pipeline=doc.get("pipeline") or {},
        )
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc


def save_model(model: SvmModel, path) -> None:
    Path(path).write_text(model_to_json(model), encoding="utf-8")


def load_model(path) -> SvmModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))
