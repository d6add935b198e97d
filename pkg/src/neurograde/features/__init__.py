"""Per-epoch feature extraction.

neural: the 102-entry qEEG vector plus its per-window building blocks.
bursts: envelope-threshold burst detection and inter-burst-interval stats.
copula: probability integral transform and Frank-copula dependence.
gasf: Gramian angular summation field image encoding.
"""

from .bursts import BurstAnnotation, detect_bursts, ibi_features
from .copula import (
    CopulaEstimate,
    debye1,
    frank_cdf,
    frank_sample,
    frank_theta,
    pit,
    tau_of_theta,
    theta_of_tau,
)
from .gasf import GasfImage, gasf_encode, gasf_stack, gasf_to_png, resize_bilinear
from .neural import (
    FeatureVector,
    GRADER_FEATURE_NAMES,
    NEURAL_FEATURE_NAMES,
    amplitude_features,
    connectivity_features,
    extract_neural_vector,
    fractal_dimension,
    grader_features,
    reeg_features,
    spectral_edge_frequency,
    spectral_features,
    svd_max_singular,
)

__all__ = [
    "BurstAnnotation",
    "CopulaEstimate",
    "FeatureVector",
    "GasfImage",
    "GRADER_FEATURE_NAMES",
    "NEURAL_FEATURE_NAMES",
    "amplitude_features",
    "connectivity_features",
    "debye1",
    "detect_bursts",
    "extract_neural_vector",
    "fractal_dimension",
    "frank_cdf",
    "frank_sample",
    "frank_theta",
    "gasf_encode",
    "gasf_stack",
    "gasf_to_png",
    "grader_features",
    "ibi_features",
    "pit",
    "reeg_features",
    "resize_bilinear",
    "spectral_edge_frequency",
    "spectral_features",
    "svd_max_singular",
    "tau_of_theta",
    "theta_of_tau",
]
