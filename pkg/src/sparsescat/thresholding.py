"""Risk-driven hard thresholding of overcomplete frame coefficients.

Keep-or-kill decisions per coefficient come from comparing two risk
terms derived from the frame's Gram matrices: the cost of *discarding*
a coefficient (signal energy that the duals cannot re-synthesize,
``a``) against the cost of *keeping* it (noise energy passed through
analysis and reconstruction, ``b``).  A coefficient is selected exactly
when discarding is at least as expensive as keeping.

Both terms use only coefficient magnitudes and entrywise absolute Gram
products, so the threshold rule is invariant under a joint rescaling of
coefficients and noise level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import LocalFrame
from .transform import Scalogram, partition_windows

__all__ = [
    "MAD_NORMAL_CONSTANT",
    "STD_LITERAL_CONSTANT",
    "NoiseEstimate",
    "ThresholdMask",
    "RiskBreakdown",
    "estimate_sigma",
    "risk_unselected",
    "risk_selected",
    "threshold_mask",
    "apply_mask",
    "upper_bound_risk",
    "masked_upper_bound_risk",
    "ideal_risk_given_mask",
    "donoho_orthogonal_mask",
    "sparsity_ratio",
    "prop3_bound_rhs",
]

# Median absolute deviation of a standard normal.
MAD_NORMAL_CONSTANT = 0.6745
# Cruder constant used with the plain standard-deviation estimator.
STD_LITERAL_CONSTANT = 0.67


@dataclass(frozen=True)
class NoiseEstimate:
    """A noise-level estimate and how it was obtained."""

    sigma_hat: float
    estimator: str
    constant: float


@dataclass(frozen=True, eq=False)
class ThresholdMask:
    """Binary keep mask, one entry per coefficient."""

    delta: np.ndarray  # (K, n) uint8


@dataclass(frozen=True, eq=False)
class RiskBreakdown:
    """Per-coefficient risk terms behind a threshold decision.

    ``a`` holds the unselected-risk terms computed from the observed
    coefficients; ``b`` the selected-risk terms per unit noise variance
    (per unit noise level in pseudo-code compatibility mode), scaled by
    each window's estimate when the mask is formed.  ``chosen_risk`` is
    the attained sum of per-coefficient minima.
    """

    a: np.ndarray  # (K, n)
    b: np.ndarray  # (K,)
    window_sigmas: np.ndarray  # one estimate per window
    windows: list[range]
    chosen_risk: float


def estimate_sigma(
    u,
    estimator: str = "mad",
    constant: float | None = None,
    noise_on: str = "real",
) -> NoiseEstimate:
    """Estimate the noise level from a window of coefficients.

    Parameters
    ----------
    u : array_like
        Coefficients (any shape, non-empty); complex values are reduced
        to their real parts (``noise_on="real"``, default) or their
        magnitudes (``noise_on="modulus"``).
    estimator : {"mad", "std"}
        ``"mad"`` is the median absolute deviation scaled by 0.6745;
        ``"std"`` is the plain standard deviation scaled by 0.67.
    constant : float, optional
        Override for the scaling constant.
    """
    u = np.asarray(u)
    if u.size == 0:
        raise ValueError("cannot estimate noise from an empty window")
    if noise_on == "real":
        vals = np.real(u).ravel()
    elif noise_on == "modulus":
        vals = np.abs(u).ravel()
    else:
        raise ValueError(f"noise_on must be 'real' or 'modulus', got {noise_on!r}")
    if estimator == "mad":
        c = MAD_NORMAL_CONSTANT if constant is None else float(constant)
        med = np.median(vals)
        sigma = float(np.median(np.abs(vals - med))) / c
    elif estimator == "std":
        c = STD_LITERAL_CONSTANT if constant is None else float(constant)
        sigma = float(vals.std()) / c
    else:
        raise ValueError(f"estimator must be 'mad' or 'std', got {estimator!r}")
    return NoiseEstimate(sigma_hat=sigma, estimator=estimator, constant=c)


def _coeff_matrix(s) -> np.ndarray:
    coeffs = s.coeffs if isinstance(s, Scalogram) else np.asarray(s)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    if coeffs.ndim != 2:
        raise ValueError(f"expected coefficients of shape (K,) or (K, n), got {coeffs.shape}")
    return coeffs


def risk_unselected(mu, frame: LocalFrame) -> np.ndarray:
    """Unselected-risk terms ``a_k = |mu_k| * sum_j |mu_j| * |<d_k, d_j>|``.

    ``mu`` may be a vector (one column) or a ``(K, n)`` matrix; the
    result has the same trailing shape.
    """
    mu = np.asarray(mu)
    squeeze = mu.ndim == 1
    M = _coeff_matrix(mu)
    if M.shape[0] != frame.n_filters:
        raise ValueError(
            f"coefficient rows {M.shape[0]} do not match frame size {frame.n_filters}"
        )
    absmu = np.abs(M)
    a = absmu * (np.abs(frame.gram_dual) @ absmu)
    return a[:, 0] if squeeze else a


def risk_selected(frame: LocalFrame, sigma: float) -> np.ndarray:
    """Selected-risk terms ``b_k = sigma**2 * sum_j |<d_k, d_j> <w_k, w_j>|``."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    return sigma * sigma * _selected_risk_unit(frame)


def _selected_risk_unit(frame: LocalFrame) -> np.ndarray:
    return np.abs(frame.gram_dual * frame.gram_analysis).sum(axis=1)


def _selected_risk_unit_pseudocode(frame: LocalFrame) -> np.ndarray:
    # Legacy variant: matrix product of the dual Gram with itself and a
    # first power of the noise level.
    return np.abs(frame.gram_dual @ frame.gram_dual).sum(axis=1)


def threshold_mask(
    scalogram,
    frame: LocalFrame,
    window: int,
    estimator: str = "mad",
    constant: float | None = None,
    sigma: float | None = None,
    noise_on: str = "real",
    compat_pseudocode: bool = False,
) -> tuple[ThresholdMask, RiskBreakdown]:
    """Risk-minimizing keep mask for a scalogram, windowed over time.

    For each time window the noise level is estimated (or taken from
    ``sigma`` when given), the selected-risk terms are scaled
    accordingly, and each coefficient is kept iff discarding it is at
    least as costly: ``a_{k,t} >= b_k``.  Exactly-zero coefficients are
    never kept (they carry nothing).

    Parameters
    ----------
    scalogram : Scalogram or array_like, shape (K, n)
    frame : LocalFrame
        Must have ``K`` filters.
    window : int
        Time-window length, at least 2; the last window may be shorter.
    estimator, constant, noise_on
        Passed to :func:`estimate_sigma`.
    sigma : float, optional
        Known noise level; skips estimation in every window.
    compat_pseudocode : bool
        Use the legacy selected-risk variant (dual Gram squared, noise
        level to the first power).

    Returns
    -------
    (ThresholdMask, RiskBreakdown)
    """
    U = _coeff_matrix(scalogram)
    K, n = U.shape
    if K != frame.n_filters:
        raise ValueError(f"scalogram has {K} rows but frame has {frame.n_filters}")
    if int(window) != window or window < 2:
        raise ValueError(f"window must be an integer >= 2, got {window!r}")

    absU = np.abs(U)
    a = absU * (np.abs(frame.gram_dual) @ absU)
    b_unit = (
        _selected_risk_unit_pseudocode(frame)
        if compat_pseudocode
        else _selected_risk_unit(frame)
    )

    windows = partition_windows(n, int(window))
    delta = np.empty((K, n), dtype=np.uint8)
    sigmas = np.empty(len(windows))
    chosen = 0.0
    for i, rng in enumerate(windows):
        cols = slice(rng.start, rng.stop)
        if sigma is not None:
            s = float(sigma)
        else:
            s = estimate_sigma(
                U[:, cols], estimator=estimator, constant=constant, noise_on=noise_on
            ).sigma_hat
        sigmas[i] = s
        bw = (s * b_unit) if compat_pseudocode else (s * s * b_unit)
        delta[:, cols] = (a[:, cols] >= bw[:, None]) & (absU[:, cols] > 0)
        chosen += float(np.minimum(a[:, cols], bw[:, None]).sum())

    breakdown = RiskBreakdown(
        a=a, b=b_unit, window_sigmas=sigmas, windows=windows, chosen_risk=chosen
    )
    return ThresholdMask(delta=delta), breakdown


def apply_mask(scalogram, mask):
    """Zero out unselected coefficients; input and output types match."""
    delta = mask.delta if isinstance(mask, ThresholdMask) else np.asarray(mask)
    if isinstance(scalogram, Scalogram):
        if delta.shape != scalogram.coeffs.shape:
            raise ValueError(
                f"mask shape {delta.shape} does not match scalogram {scalogram.coeffs.shape}"
            )
        return Scalogram(scalogram.coeffs * delta, scalogram.scale_set)
    coeffs = np.asarray(scalogram)
    if delta.shape != coeffs.shape:
        raise ValueError(f"mask shape {delta.shape} does not match coefficients {coeffs.shape}")
    return coeffs * delta


def upper_bound_risk(x_coeffs, frame: LocalFrame, sigma: float) -> float:
    """Sum over coefficients of ``min(a_k, b_k)``: the risk the threshold
    rule attains with knowledge of the clean coefficients."""
    a = risk_unselected(x_coeffs, frame)
    b = risk_selected(frame, sigma)
    if a.ndim == 1:
        return float(np.minimum(a, b).sum())
    return float(np.minimum(a, b[:, None]).sum())


def masked_upper_bound_risk(coeffs, frame: LocalFrame, sigma: float, delta) -> float:
    """Risk of a *forced* keep mask: ``b`` on selected entries, ``a`` elsewhere."""
    delta = np.asarray(delta)
    a = risk_unselected(coeffs, frame)
    if delta.shape != a.shape:
        raise ValueError(f"mask shape {delta.shape} does not match coefficients {a.shape}")
    b = risk_selected(frame, sigma)
    b = b if a.ndim == 1 else b[:, None]
    return float((delta * b + (1 - delta) * a).sum())


def ideal_risk_given_mask(x_coeffs, frame: LocalFrame, sigma: float, delta) -> float:
    """Exact expected squared reconstruction error of a fixed keep mask.

    For clean coefficients ``mu`` and i.i.d. Gaussian sample noise of
    standard deviation ``sigma``, the estimate keeps the selected
    coefficients of the noisy signal and re-synthesizes with the duals.
    The error splits into a signed quadratic form over unselected pairs
    plus a noise term over selected pairs; the real part of each is
    returned (imaginary parts cancel by Hermitian symmetry).
    """
    mu = np.asarray(x_coeffs)
    if mu.ndim != 1 or mu.size != frame.n_filters:
        raise ValueError(f"expected {frame.n_filters} coefficients, got shape {mu.shape}")
    delta = np.asarray(delta, dtype=float)
    if delta.shape != mu.shape:
        raise ValueError(f"mask shape {delta.shape} does not match coefficients {mu.shape}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    mu_u = mu * (1.0 - delta)
    term_u = float(np.real(mu_u.conj() @ frame.gram_dual @ mu_u))
    pair = frame.gram_dual * frame.gram_analysis
    term_s = float(sigma * sigma * np.real(delta @ pair @ delta))
    return term_u + term_s


def donoho_orthogonal_mask(x_coeffs, sigma: float) -> np.ndarray:
    """Oracle keep rule for orthonormal analyses: keep iff ``|mu_k|**2 > sigma**2``."""
    mu = np.asarray(x_coeffs)
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    return (np.abs(mu) ** 2 > sigma * sigma).astype(np.uint8)


def sparsity_ratio(m, zero_tol: float = 0.0) -> float:
    """Fraction of entries that are (numerically) zero.

    ``zero_tol`` is the magnitude at or below which an entry counts as
    zero; the default counts exact zeros only.
    """
    if zero_tol < 0:
        raise ValueError(f"zero_tol must be nonnegative, got {zero_tol!r}")
    arr = np.asarray(m)
    if arr.size == 0:
        return 1.0
    nonzero = int(np.count_nonzero(np.abs(arr) > zero_tol))
    return 1.0 - nonzero / arr.size


def prop3_bound_rhs(x_coeffs, frame: LocalFrame, sigma: float) -> float:
    """Deterministic bound for the noise-averaged all-unselected risk.

    Adds to the clean all-unselected risk a correction matrix built
    from the coefficient magnitudes, the analysis l1 norms, and the
    mean and variance of folded Gaussian noise:

        ``C[k, j] = |mu_k| * ||w_j||_1 * sigma * sqrt(2/pi)
                  + |mu_j| * ||w_k||_1 * sigma * sqrt(2/pi)
                  + sigma**2 * (1 - 2/pi)``

    weighted by the dual Gram magnitudes.  The clean-side term is the
    all-unselected risk (nothing kept), matching the regime the bound
    is stated for.
    """
    mu = np.asarray(x_coeffs)
    if mu.ndim != 1 or mu.size != frame.n_filters:
        raise ValueError(f"expected {frame.n_filters} coefficients, got shape {mu.shape}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    am = np.abs(mu)
    l1 = frame.l1_norms
    c = sigma * math.sqrt(2.0 / math.pi)
    C = c * (am[:, None] * l1[None, :] + am[None, :] * l1[:, None])
    C += sigma * sigma * (1.0 - 2.0 / math.pi)
    correction = float((C * np.abs(frame.gram_dual)).sum())
    return float(risk_unselected(mu, frame).sum()) + correction
