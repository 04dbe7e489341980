"""Sparse scattering features via risk-thresholded wavelet frames.

The package builds overcomplete analytic wavelet filter banks, computes
convolutional coefficients, selects coefficients by comparing two
computable sides of an oracle risk bound, and stacks the thresholded
transforms into a two-layer scattering feature extractor.
"""

from .frames import (
    FilterBank,
    FilterSupportError,
    FrameRankWarning,
    GammatoneParams,
    LocalFrame,
    MorletParams,
    ScaleSet,
    build_filterbank,
    gammatone_sigma,
    local_frame,
    make_scales,
    transform_length,
)
from .transform import (
    Scalogram,
    Signal,
    cwt,
    cwt_stack,
    frame_upper_bound,
    lowpass_average,
    modulus,
    partition_windows,
)
from .thresholding import (
    MAD_NORMAL_CONSTANT,
    STD_LITERAL_CONSTANT,
    NoiseEstimate,
    RiskBreakdown,
    ThresholdMask,
    apply_mask,
    donoho_orthogonal_mask,
    estimate_sigma,
    ideal_risk_given_mask,
    masked_upper_bound_risk,
    risk_selected,
    risk_unselected,
    sparsity_ratio,
    threshold_mask,
    upper_bound_risk,
)
from .oracle import (
    EnumerationResult,
    MoorePenroseReport,
    brute_force_ideal_mask,
    mc_realized_mse,
    verify_moore_penrose,
)
from .scattering import (
    LayerSpec,
    ScatteringConfig,
    ScatteringNetwork,
    forward,
    sdsn_layer1,
    sdsn_layer2,
)
from .fileio import (
    FileFormatError,
    WavFormatError,
    filterbank_hash,
    load_filterbank,
    read_matrix,
    read_wav,
    save_filterbank,
    write_csv,
    write_matrix,
    write_wav,
)

__version__ = "0.1.0"

__all__ = [
    "FilterBank",
    "FilterSupportError",
    "FrameRankWarning",
    "GammatoneParams",
    "LocalFrame",
    "MorletParams",
    "ScaleSet",
    "build_filterbank",
    "gammatone_sigma",
    "local_frame",
    "make_scales",
    "transform_length",
    "Scalogram",
    "Signal",
    "cwt",
    "cwt_stack",
    "frame_upper_bound",
    "lowpass_average",
    "modulus",
    "partition_windows",
    "MAD_NORMAL_CONSTANT",
    "STD_LITERAL_CONSTANT",
    "NoiseEstimate",
    "RiskBreakdown",
    "ThresholdMask",
    "apply_mask",
    "donoho_orthogonal_mask",
    "estimate_sigma",
    "ideal_risk_given_mask",
    "masked_upper_bound_risk",
    "risk_selected",
    "risk_unselected",
    "sparsity_ratio",
    "threshold_mask",
    "upper_bound_risk",
    "EnumerationResult",
    "MoorePenroseReport",
    "brute_force_ideal_mask",
    "mc_realized_mse",
    "verify_moore_penrose",
    "LayerSpec",
    "ScatteringConfig",
    "ScatteringNetwork",
    "forward",
    "sdsn_layer1",
    "sdsn_layer2",
    "FileFormatError",
    "WavFormatError",
    "filterbank_hash",
    "load_filterbank",
    "read_matrix",
    "read_wav",
    "save_filterbank",
    "write_csv",
    "write_matrix",
    "write_wav",
    "__version__",
]
