"""Labeled grayscale datasets: PGM I/O, directory loading, splits, synthesis.

On disk a dataset is a directory with one sub-directory per class::

    root/
      true/    *.pgm
      pseudo/  *.pgm
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dwt import as_image
from .errors import (EmptyClass, InfeasibleSplit, MalformedPgm, MixedDimensions,
                     OutOfRange)
from .labels import Label

__all__ = [
    "LabeledSample",
    "SplitSpec",
    "read_pgm",
    "load_pgm",
    "write_pgm",
    "encode_pgm",
    "load_dataset",
    "save_dataset",
    "split",
    "synth_generate",
]

_TOKEN = re.compile(rb"\s*(?:#[^\n]*(?:\n|$)\s*)*([^\s#]+)")


@dataclass(frozen=True)
class LabeledSample:
    image: np.ndarray
    label: Label
    source_id: str


@dataclass(frozen=True)
class SplitSpec:
    train_true: int
    train_pseudo: int
    seed: int = 0


def _tokens(data: bytes, pos: int, count: int) -> tuple[list[bytes], int]:
    out = []
    for _ in range(count):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise MalformedPgm("truncated PGM header")
        out.append(m.group(1))
        pos = m.end()
    return out, pos


def read_pgm(data: bytes) -> np.ndarray:
    """Parse P2 (ASCII) or P5 (binary) PGM bytes with maxval <= 255."""
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedPgm(f"bad magic number {magic!r}")
    try:
        (w, h, maxval), pos = _tokens(data, 2, 3)
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise MalformedPgm(f"non-numeric PGM header field: {exc}") from None
    if width < 1 or height < 1:
        raise MalformedPgm(f"invalid dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise MalformedPgm(f"unsupported maxval {maxval}")
    n = width * height
    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        if pos >= len(data) or not data[pos:pos + 1].isspace():
            raise MalformedPgm("missing whitespace after PGM header")
        raster = data[pos + 1:pos + 1 + n]
        if len(raster) < n:
            raise MalformedPgm(f"truncated raster: {len(raster)} of {n} bytes")
        pix = np.frombuffer(raster, dtype=np.uint8)
    else:
        body = re.sub(rb"#[^\n]*", b" ", data[pos:]).split()
        if len(body) < n:
            raise MalformedPgm(f"truncated raster: {len(body)} of {n} values")
        try:
            pix = np.array([int(t) for t in body[:n]], dtype=np.int64)
        except ValueError:
            raise MalformedPgm("non-numeric pixel value") from None
    if pix.max() > maxval or pix.min() < 0:
        raise MalformedPgm("pixel value exceeds maxval")
    return as_image(pix.reshape(height, width))


def load_pgm(path) -> np.ndarray:
    return read_pgm(Path(path).read_bytes())


def encode_pgm(image) -> bytes:
    img = np.rint(np.asarray(image, dtype=np.float64))
    if img.ndim != 2:
        raise ValueError("PGM images must be 2-D")
    if img.size and (img.min() < 0 or img.max() > 255):
        raise OutOfRange(f"pixel values span [{img.min()}, {img.max()}], outside [0, 255]")
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes()


def write_pgm(image, path) -> None:
    Path(path).write_bytes(encode_pgm(image))


def load_dataset(root) -> list[LabeledSample]:
    root = Path(root)
    samples: list[LabeledSample] = []
    shape = None
    for label in (Label.TRUE, Label.PSEUDO):
        folder = root / label.value
        if not folder.is_dir():
            raise FileNotFoundError(f"missing class directory {folder}")
        files = sorted(p for p in folder.iterdir() if p.suffix.lower() == ".pgm")
        if not files:
            raise EmptyClass(f"no .pgm files in {folder}")
        for f in files:
            img = load_pgm(f)
            if shape is None:
                shape = img.shape
            elif img.shape != shape:
                raise MixedDimensions(f"{f} is {img.shape}, expected {shape}")
            samples.append(LabeledSample(img, label, f"{label.value}/{f.name}"))
    return samples


def save_dataset(samples: Sequence[LabeledSample], root) -> list[Path]:
    root = Path(root)
    paths = []
    for s in samples:
        path = root / s.source_id
        path.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(s.image, path)
        paths.append(path)
    return paths


def split(samples: Sequence[LabeledSample], spec: SplitSpec
          ) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded per-class shuffle; the first ``train_*`` of each class go to training."""
    rng = np.random.default_rng(spec.seed)
    train: list[LabeledSample] = []
    test: list[LabeledSample] = []
    for label, k in ((Label.TRUE, spec.train_true), (Label.PSEUDO, spec.train_pseudo)):
        group = [s for s in samples if s.label is label]
        if k < 0 or k > len(group):
            raise InfeasibleSplit(
                f"requested {k} {label.value} training samples, {len(group)} available")
        order = rng.permutation(len(group))
        train.extend(group[i] for i in order[:k])
        test.extend(group[i] for i in order[k:])
    return train, test


# -- synthetic stand-in data ------------------------------------------------

def _background(rng: np.random.Generator, yy: np.ndarray, xx: np.ndarray) -> np.ndarray:
    theta = rng.uniform(0, 2 * np.pi)
    slope = rng.uniform(0.0, 0.1)
    c = xx.shape[0] / 2.0
    ramp = slope * ((xx - c) * np.cos(theta) + (yy - c) * np.sin(theta))
    return 128.0 + rng.uniform(-4, 4) + ramp


def _true_like(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = _background(rng, yy, xx)
    for _ in range(rng.integers(2, 5)):
        amp = rng.choice([-1.0, 1.0]) * rng.uniform(70, 110)
        cy, cx = rng.uniform(8, size - 8, size=2)
        if rng.random() < 0.5:
            r = rng.uniform(3, 8)
            mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        else:
            # straight streak (broken trace / short)
            ang = rng.uniform(0, np.pi)
            half_len = rng.uniform(8, 20)
            half_w = rng.uniform(1.0, 2.5)
            u = (xx - cx) * np.cos(ang) + (yy - cy) * np.sin(ang)
            v = -(xx - cx) * np.sin(ang) + (yy - cy) * np.cos(ang)
            mask = (np.abs(u) <= half_len) & (np.abs(v) <= half_w)
        img = img + amp * mask
    return img + rng.normal(0, 1.5, img.shape)


def _pseudo_like(rng: np.random.Generator, size: int) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    img = _background(rng, yy, xx)
    for _ in range(rng.integers(1, 3)):
        # diffuse stain: dust or weak oxidation
        amp = rng.choice([-1.0, 1.0]) * rng.uniform(6, 14)
        cy, cx = rng.uniform(0, size, size=2)
        s = rng.uniform(5, 10)
        img = img + amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
    return img + rng.normal(0, rng.uniform(3, 6), img.shape)


def synth_generate(n_per_class: int, size: int = 64, seed: int = 0) -> list[LabeledSample]:
    """Generate ``n_per_class`` true-like and pseudo-like integer-valued images.

    True-like images carry a few sharp, high-contrast discs or streaks over a
    smooth background; pseudo-like images carry only diffuse low-contrast
    stains plus fine-grain noise.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    rng = np.random.default_rng(seed)
    out = []
    for label, make in ((Label.TRUE, _true_like), (Label.PSEUDO, _pseudo_like)):
        for k in range(n_per_class):
            img = np.clip(np.rint(make(rng, size)), 0, 255)
            out.append(LabeledSample(as_image(img), label, f"{label.value}/{label.value}_{k:04d}.pgm"))
    return out
