"""Two-layer scattering features with optional risk thresholding.

Layer 1 takes wavelet coefficient magnitudes of the input signal; layer 2
re-transforms each thresholded layer-1 row with a coarser bank.  Keep
masks are computed on the complex coefficients (window by window) and
applied to the magnitudes; a magnitude is zero exactly where the complex
coefficient is, so the supports agree.  Low-pass averaging of the
thresholded magnitudes yields the invariant features.

With ``sparse=False`` the masks are all-ones and the network reduces to
a plain dense scattering transform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .frames import (
    FilterBank,
    GammatoneParams,
    LocalFrame,
    MorletParams,
    build_filterbank,
    local_frame,
    make_scales,
    transform_length,
)
from .thresholding import threshold_mask
from .transform import Signal, cwt, cwt_stack, lowpass_average

__all__ = [
    "LayerSpec",
    "ScatteringConfig",
    "LayerOutput",
    "ScatteringNetwork",
    "sdsn_layer1",
    "sdsn_layer2",
    "forward",
]


@dataclass(frozen=True)
class LayerSpec:
    """One scattering layer: scale grid, wavelet family, decimation."""

    octaves: int
    quality: int
    family: str = "morlet"
    params: MorletParams | GammatoneParams | None = None
    decimation: int | None = None  # defaults to 2**octaves

    def resolve_params(self) -> MorletParams | GammatoneParams:
        if self.params is not None:
            return self.params
        if self.family == "morlet":
            return MorletParams.for_quality(self.quality)
        if self.family == "gammatone":
            return GammatoneParams.quasi_orthogonal(self.quality)
        raise ValueError(f"family must be 'morlet' or 'gammatone', got {self.family!r}")

    def resolve_decimation(self) -> int:
        return 2 ** self.octaves if self.decimation is None else int(self.decimation)


@dataclass(frozen=True)
class ScatteringConfig:
    """Full configuration of the two-layer network.

    Defaults: 5 octaves x 8 per octave over 4 octaves x 1, window 2**16,
    sparse thresholding on, MAD noise estimation on real parts.
    """

    layer1: LayerSpec = LayerSpec(octaves=5, quality=8)
    layer2: LayerSpec = LayerSpec(octaves=4, quality=1)
    window: int = 2 ** 16
    sparse: bool = True
    estimator: str = "mad"
    estimator_constant: float | None = None
    sigma: float | None = None
    noise_on: str = "real"
    compat_pseudocode: bool = False
    normalization: str = "l2"
    time_average: bool = True

    def dense(self) -> "ScatteringConfig":
        """Copy with thresholding disabled."""
        return replace(self, sparse=False)


@dataclass(frozen=True, eq=False)
class LayerOutput:
    """Raw magnitudes, keep mask, thresholded magnitudes, averaged output.

    Layer 1 arrays are ``(K1, n)``; layer 2 arrays are ``(K2, K1, n)``
    with the new scale axis first.  ``S`` is decimated along time.
    """

    U: np.ndarray
    U_t: np.ndarray
    mask: np.ndarray
    S: np.ndarray


class ScatteringNetwork:
    """Banks and local frames for a fixed configuration and signal length."""

    def __init__(self, config: ScatteringConfig, n: int):
        if n < 2:
            raise ValueError(f"signal length must be at least 2, got {n}")
        self.config = config
        self.n = int(n)
        self.bank1, self.frame1 = self._build_layer(config.layer1)
        self.bank2, self.frame2 = self._build_layer(config.layer2)

    def _build_layer(self, spec: LayerSpec) -> tuple[FilterBank, LocalFrame]:
        scales = make_scales(spec.octaves, spec.quality)
        params = spec.resolve_params()
        n_fft = transform_length(scales, params, self.n)
        bank = build_filterbank(scales, params, n_fft, self.config.normalization)
        return bank, local_frame(bank)

    def _mask(self, coeffs: np.ndarray, frame: LocalFrame) -> np.ndarray:
        cfg = self.config
        if not cfg.sparse:
            return np.ones(coeffs.shape, dtype=np.uint8)
        mask, _ = threshold_mask(
            coeffs,
            frame,
            window=cfg.window,
            estimator=cfg.estimator,
            constant=cfg.estimator_constant,
            sigma=cfg.sigma,
            noise_on=cfg.noise_on,
            compat_pseudocode=cfg.compat_pseudocode,
        )
        return mask.delta

    def layer1(self, y) -> LayerOutput:
        """First-order coefficients of a (unit-energy) signal."""
        z = cwt(y, self.bank1)
        mask = self._mask(z.coeffs, self.frame1)
        U = np.abs(z.coeffs)
        U_t = U * mask
        S = lowpass_average(U_t, self.bank1, self.config.layer1.resolve_decimation())
        return LayerOutput(U=U, U_t=U_t, mask=mask, S=S)

    def layer2(self, u1_t) -> LayerOutput:
        """Second-order coefficients from thresholded layer-1 magnitudes.

        Each layer-1 row is re-transformed and thresholded independently
        (own windows, own noise estimates).
        """
        u1_t = np.asarray(u1_t, dtype=float)
        if u1_t.ndim != 2:
            raise ValueError(f"expected (K1, n) magnitudes, got shape {u1_t.shape}")
        Z = cwt_stack(u1_t, self.bank2)  # (K1, K2, n)
        masks = np.empty(Z.shape, dtype=np.uint8)
        for r in range(Z.shape[0]):
            masks[r] = self._mask(Z[r], self.frame2)
        U = np.abs(Z).transpose(1, 0, 2)  # (K2, K1, n)
        mask = masks.transpose(1, 0, 2)
        U_t = U * mask
        S = lowpass_average(U_t, self.bank2, self.config.layer2.resolve_decimation())
        return LayerOutput(U=U, U_t=U_t, mask=mask, S=S)

    def forward(self, y) -> np.ndarray:
        """Feature vector of one signal (normalized to unit energy first).

        Features are the low-passed magnitudes of both layers, fully
        averaged over time by default, concatenated scale-major: the
        ``K1`` layer-1 values first, then layer-2 values with the new
        (layer-2) scale as the slow axis.
        """
        sig = y if isinstance(y, Signal) else Signal(np.asarray(y, dtype=float))
        x = sig.normalized().samples
        out1 = self.layer1(x)
        out2 = self.layer2(out1.U_t)
        if self.config.time_average:
            f1 = out1.S.mean(axis=-1)
            f2 = out2.S.mean(axis=-1).ravel()
        else:
            f1 = out1.S.ravel()
            f2 = out2.S.ravel()
        return np.concatenate([f1, f2])


@lru_cache(maxsize=8)
def _network(config: ScatteringConfig, n: int) -> ScatteringNetwork:
    return ScatteringNetwork(config, n)


def _signal_length(y) -> int:
    return len(y.samples) if isinstance(y, Signal) else np.asarray(y).shape[-1]


def sdsn_layer1(y, config: ScatteringConfig = ScatteringConfig()) -> LayerOutput:
    """Layer-1 output for one signal under ``config`` (network cached)."""
    return _network(config, _signal_length(y)).layer1(y)


def sdsn_layer2(u1_t, config: ScatteringConfig = ScatteringConfig()) -> LayerOutput:
    """Layer-2 output from thresholded layer-1 magnitudes."""
    u1_t = np.asarray(u1_t, dtype=float)
    return _network(config, u1_t.shape[-1]).layer2(u1_t)


def forward(y, config: ScatteringConfig = ScatteringConfig()) -> np.ndarray:
    """Feature vector of one signal under ``config`` (network cached)."""
    return _network(config, _signal_length(y)).forward(y)
