"""Separable multi-level 2-D discrete wavelet transform.

Each level filters the rows of the current approximation with the lowpass
and highpass taps (downsampling by two), then filters the columns of both
row outputs the same way::

    L[r, m]  = sum_i w[i] * LL[r, 2m - i]        H[r, m]  = sum_i h[i] * LL[r, 2m - i]
    LL[n, c] = sum_i w[i] * L[2n - i, c]         LH[n, c] = sum_i h[i] * L[2n - i, c]
    HL[n, c] = sum_i w[i] * H[2n - i, c]         HH[n, c] = sum_i h[i] * H[2n - i, c]

Indices that fall outside the signal wrap around (periodic extension).  With
orthonormal quadrature-mirror taps the transform is an orthogonal operator,
so the inverse is its transpose.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import NonDyadic, OddDimension

__all__ = [
    "Family",
    "FilterPair",
    "Subband",
    "SubbandPyramid",
    "as_image",
    "filter_coefficients",
    "decompose_level",
    "decompose",
    "reconstruct_level",
    "reconstruct",
]


class Family(str, enum.Enum):
    HAAR = "haar"
    DAUBECHIES4 = "db4"

    @classmethod
    def parse(cls, name: "str | Family") -> "Family":
        if isinstance(name, Family):
            return name
        key = name.strip().lower()
        aliases = {"haar": cls.HAAR, "db1": cls.HAAR, "db4": cls.DAUBECHIES4,
                   "db2": cls.DAUBECHIES4, "daubechies4": cls.DAUBECHIES4}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown wavelet family {name!r}") from None


@dataclass(frozen=True)
class FilterPair:
    family: Family
    lowpass: tuple[float, ...]
    highpass: tuple[float, ...]


def _qmf_highpass(lowpass: Sequence[float]) -> tuple[float, ...]:
    n = len(lowpass)
    return tuple((-1) ** i * lowpass[n - 1 - i] for i in range(n))


def filter_coefficients(family: "Family | str" = Family.HAAR) -> FilterPair:
    """Return the orthonormal analysis taps for a wavelet family."""
    family = Family.parse(family)
    if family is Family.HAAR:
        s = 1.0 / math.sqrt(2.0)
        low = (s, s)
    else:
        # 4-tap Daubechies (db2 in PyWavelets naming)
        r3 = math.sqrt(3.0)
        d = 4.0 * math.sqrt(2.0)
        low = ((1 + r3) / d, (3 + r3) / d, (3 - r3) / d, (1 - r3) / d)
    return FilterPair(family, low, _qmf_highpass(low))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_image(pixels) -> np.ndarray:
    """Coerce a 2-D grid of intensities to a read-only float64 array."""
    img = np.array(pixels, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image must be a non-empty 2-D grid, got shape {img.shape}")
    return _frozen(img)


@dataclass(frozen=True)
class Subband:
    kind: str  # "LL", "LH", "HL" or "HH"
    level: int
    coefficients: np.ndarray

    @property
    def height(self) -> int:
        return self.coefficients.shape[0]

    @property
    def width(self) -> int:
        return self.coefficients.shape[1]

    @property
    def name(self) -> str:
        return f"{self.kind}{self.level}"


@dataclass(frozen=True)
class SubbandPyramid:
    levels: int
    filter: FilterPair
    source_shape: tuple[int, int]
    details: tuple[tuple[Subband, Subband, Subband], ...]  # (LH, HL, HH) for levels 1..L
    approximation: Subband

    def bands(self) -> Iterator[Subband]:
        """Yield every band: LH, HL, HH per level (finest first), then LL of the last level."""
        for triple in self.details:
            yield from triple
        yield self.approximation

    def band(self, kind: str, level: int) -> Subband:
        if kind == "LL":
            if level != self.levels:
                raise KeyError(f"only LL{self.levels} is retained")
            return self.approximation
        idx = ("LH", "HL", "HH").index(kind)
        return self.details[level - 1][idx]

    @property
    def coefficient_count(self) -> int:
        return sum(b.coefficients.size for b in self.bands())

    def energy(self) -> float:
        return float(sum(np.sum(b.coefficients ** 2) for b in self.bands()))


def _analysis(x: np.ndarray, taps: Sequence[float], axis: int) -> np.ndarray:
    xm = np.moveaxis(x, axis, -1)
    n = xm.shape[-1]
    m = np.arange(n // 2)[:, None]
    i = np.arange(len(taps))[None, :]
    idx = (2 * m - i) % n
    out = xm[..., idx] @ np.asarray(taps, dtype=np.float64)
    return np.moveaxis(out, -1, axis)


def _synthesis(y: np.ndarray, taps: Sequence[float], axis: int) -> np.ndarray:
    ym = np.moveaxis(y, axis, -1)
    half = ym.shape[-1]
    n = 2 * half
    out = np.zeros(ym.shape[:-1] + (n,), dtype=np.float64)
    m = np.arange(half)
    for i, t in enumerate(taps):
        # for fixed i the target indices are distinct, so no scatter collisions
        out[..., (2 * m - i) % n] += t * ym
    return np.moveaxis(out, -1, axis)


def decompose_level(
    ll: "Union[Subband, np.ndarray]", filt: FilterPair
) -> tuple[Subband, Subband, Subband, Subband]:
    """One analysis step on an approximation band; returns (LL, LH, HL, HH) one level deeper."""
    if isinstance(ll, Subband):
        data, level = ll.coefficients, ll.level + 1
    else:
        data, level = np.asarray(ll, dtype=np.float64), 1
    h, w = data.shape
    if h % 2 or w % 2:
        raise OddDimension(f"cannot halve a {h}x{w} band")
    lo, hi = filt.lowpass, filt.highpass
    row_lo = _analysis(data, lo, axis=1)
    row_hi = _analysis(data, hi, axis=1)
    return (
        Subband("LL", level, _frozen(_analysis(row_lo, lo, axis=0))),
        Subband("LH", level, _frozen(_analysis(row_lo, hi, axis=0))),
        Subband("HL", level, _frozen(_analysis(row_hi, lo, axis=0))),
        Subband("HH", level, _frozen(_analysis(row_hi, hi, axis=0))),
    )


def decompose(image, levels: int, filt: "FilterPair | None" = None) -> SubbandPyramid:
    """Decompose ``image`` into ``levels`` levels, recursing on the approximation only."""
    filt = filt or filter_coefficients(Family.HAAR)
    img = as_image(image)
    h, w = img.shape
    if levels < 1:
        raise NonDyadic(f"levels must be >= 1, got {levels}")
    step = 2 ** levels
    if h % step or w % step:
        raise NonDyadic(f"{h}x{w} image is not divisible by 2^{levels}")
    details = []
    current: "Subband | np.ndarray" = img
    for _ in range(levels):
        ll, lh, hl, hh = decompose_level(current, filt)
        details.append((lh, hl, hh))
        current = ll
    return SubbandPyramid(levels, filt, (h, w), tuple(details), current)


def reconstruct_level(ll: np.ndarray, lh: np.ndarray, hl: np.ndarray, hh: np.ndarray,
                      filt: FilterPair) -> np.ndarray:
    lo, hi = filt.lowpass, filt.highpass
    row_lo = _synthesis(ll, lo, axis=0) + _synthesis(lh, hi, axis=0)
    row_hi = _synthesis(hl, lo, axis=0) + _synthesis(hh, hi, axis=0)
    return _synthesis(row_lo, lo, axis=1) + _synthesis(row_hi, hi, axis=1)


def reconstruct(pyramid: SubbandPyramid) -> np.ndarray:
    """Invert :func:`decompose` (exact up to rounding for orthonormal taps)."""
    current = pyramid.approximation.coefficients
    for lh, hl, hh in reversed(pyramid.details):
        current = reconstruct_level(current, lh.coefficients, hl.coefficients,
                                    hh.coefficients, pyramid.filter)
    return _frozen(np.array(current))
