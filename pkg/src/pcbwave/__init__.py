"""Wavelet-feature SVM classifier for true vs pseudo PCB defects."""

from .dwt import Family, FilterPair, Subband, SubbandPyramid, decompose, filter_coefficients, reconstruct
from .evaluation import ConfusionMatrix, accuracy, confusion, grid_search
from .features import BandSet, FeatureVector, extract_features, subband_mean, subband_sd
from .labels import Label
from .svm import SvmModel, TrainConfig, decision_value, predict, rbf_kernel, train

__version__ = "0.1.0"
