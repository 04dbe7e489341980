"""FFT-based continuous wavelet transform and scalogram utilities.

The transform zero-pads the signal onto the bank's DFT grid, multiplies
by the conjugated frequency responses and crops back, so each output
coefficient is the inner product ``<y, psi_lam(. - t)>`` with the filter
anchored at output time ``t``.  Because the padding is at least as long
as the filter support, every column equals the linear convolution
against the zero-extended signal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import FilterBank, ScaleSet

__all__ = [
    "Signal",
    "Scalogram",
    "cwt",
    "cwt_stack",
    "modulus",
    "lowpass_average",
    "partition_windows",
    "frame_upper_bound",
]


@dataclass(frozen=True, eq=False)
class Signal:
    """A finite 1-D real signal with an optional sample rate."""

    samples: np.ndarray
    sample_rate: float | None = None

    def __post_init__(self) -> None:
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {samples.shape}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def normalized(self) -> "Signal":
        """Unit-energy copy; the zero signal is returned unchanged."""
        nrm = float(np.linalg.norm(self.samples))
        if nrm == 0.0:
            return self
        return Signal(self.samples / nrm, self.sample_rate)


@dataclass(frozen=True, eq=False)
class Scalogram:
    """Complex wavelet coefficients, one row per scale."""

    coeffs: np.ndarray  # (n_filters, n) complex
    scale_set: ScaleSet

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape


def _as_samples(y) -> np.ndarray:
    if isinstance(y, Signal):
        return y.samples
    arr = np.asarray(y, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {arr.shape}")
    return arr


def cwt_stack(signals, bank: FilterBank) -> np.ndarray:
    """Transform a batch of equal-length signals.

    Parameters
    ----------
    signals : array_like, shape (batch, n)
    bank : FilterBank

    Returns
    -------
    ndarray, shape (batch, n_filters, n), complex
    """
    S = np.asarray(signals, dtype=float)
    if S.ndim != 2:
        raise ValueError(f"expected a (batch, n) array, got shape {S.shape}")
    n = S.shape[1]
    support = bank.support_length
    if n < support:
        raise ValueError(
            f"signal length {n} is shorter than the filter support {support}"
        )
    if n + support > bank.n_fft:
        raise ValueError(
            f"signal length {n} needs n_fft >= {n + support}, bank grid is {bank.n_fft}"
        )
    X = np.fft.fft(S, n=bank.n_fft, axis=1)
    Z = np.fft.ifft(X[:, None, :] * np.conj(bank.filters_freq)[None, :, :], axis=2)
    return Z[:, :, :n]


def cwt(y, bank: FilterBank) -> Scalogram:
    """Continuous wavelet transform of one signal.

    Row ``j`` holds ``<y, psi_{lambda_j}(. - t)>`` for every output time
    ``t``; the signal is zero-padded onto the bank's grid, so feeding an
    impulse reproduces the conjugated, time-reversed filter.
    """
    x = _as_samples(y)
    rows = cwt_stack(x[None, :], bank)[0]
    return Scalogram(rows, bank.scale_set)


def modulus(s) -> np.ndarray:
    """Entrywise magnitudes of a scalogram (or any coefficient array)."""
    coeffs = s.coeffs if isinstance(s, Scalogram) else np.asarray(s)
    return np.abs(coeffs)


def lowpass_average(u, bank: FilterBank, decimation: int = 1) -> np.ndarray:
    """Convolve rows with the bank's Gaussian low-pass, then decimate.

    The low-pass integrates to one and is applied as a zero-phase
    circular convolution along the last axis, so constant rows are
    preserved exactly.

    Parameters
    ----------
    u : array_like
        Real array; the last axis is time.
    bank : FilterBank
        Supplies the low-pass width.
    decimation : int
        Keep every ``decimation``-th sample; must divide the time length.
    """
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    if int(decimation) != decimation or decimation < 1:
        raise ValueError(f"decimation must be a positive integer, got {decimation!r}")
    if n % decimation:
        raise ValueError(f"decimation {decimation} does not divide length {n}")
    freqs = 2.0 * np.pi * np.arange(n // 2 + 1) / n
    gain = np.exp(-0.5 * (bank.lowpass_sigma_t * freqs) ** 2)
    out = np.fft.irfft(np.fft.rfft(u, axis=-1) * gain, n=n, axis=-1)
    return out[..., :: int(decimation)]


def partition_windows(n: int, window: int) -> list[range]:
    """Split ``range(n)`` into consecutive windows of length ``window``.

    The last window is shorter when ``window`` does not divide ``n``.

    Examples
    --------
    >>> partition_windows(10, 4)
    [range(0, 4), range(4, 8), range(8, 10)]
    """
    if int(window) != window or window < 1:
        raise ValueError(f"window must be a positive integer, got {window!r}")
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    return [range(s, min(s + int(window), int(n))) for s in range(0, int(n), int(window))]


def frame_upper_bound(bank: FilterBank) -> float:
    """Upper frame constant ``C`` with ``||cwt(y)||_F <= C * ||y||_2``,
    from the peak of the summed squared frequency responses."""
    power = (np.abs(bank.filters_freq) ** 2).sum(axis=0)
    return float(np.sqrt(power.max()))
