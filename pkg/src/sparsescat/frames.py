"""Wavelet families, filter banks, and local analysis frames.

Two complex mother wavelets are provided: the Morlet wavelet (complex
carrier under a unit-width Gaussian, symmetric envelope) and the causal
Gammatone wavelet (auditory-motivated, asymmetric envelope).  A filter
bank samples dilated copies of the mother wavelet on the DFT grid of a
fixed transform length, together with a Gaussian low-pass covering the
band below the coarsest wavelet.

A :class:`LocalFrame` collects the time-domain filters at a single
output position into an explicit analysis matrix ``W``, its
Moore-Penrose pseudoinverse ``Wd``, and the two Gram matrices (analysis
filters, and dual/reconstruction filters) consumed by the risk-driven
thresholding rules.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import next_fast_len
from scipy.integrate import quad

__all__ = [
    "ScaleSet",
    "make_scales",
    "MorletParams",
    "morlet_time",
    "morlet_freq",
    "GammatoneParams",
    "gammatone_sigma",
    "gammatone_time",
    "gammatone_freq",
    "FilterBank",
    "build_filterbank",
    "transform_length",
    "FilterSupportError",
    "LocalFrame",
    "local_frame",
    "FrameRankWarning",
]

# Envelope level, relative to its peak, below which a sampled filter is
# truncated to zero.  Supports are rounded up to even length.
ENVELOPE_CUTOFF = 1e-5

# Number of 2*pi shifts summed on each side when sampling a frequency
# response on the DFT grid; keeps straddling filters consistent with
# unit-step time sampling.
_WRAP_PERIODS = 4


class FilterSupportError(ValueError):
    """The coarsest filter does not fit in the requested transform length."""


class FrameRankWarning(UserWarning):
    """The pseudoinverse cutoff discarded one or more singular values."""


# ---------------------------------------------------------------------------
# scale grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScaleSet:
    """Geometric dilation grid ``lambda_j = 2**((j-1)/Q)`` for ``j = 1..J*Q``."""

    J: int
    Q: int
    lambdas: np.ndarray

    def __len__(self) -> int:
        return self.lambdas.size


def make_scales(J: int, Q: int) -> ScaleSet:
    """Build the dilation grid for ``J`` octaves with ``Q`` scales per octave.

    Parameters
    ----------
    J : int
        Number of octaves, at least 1.
    Q : int
        Scales per octave (quality factor), at least 1.

    Returns
    -------
    ScaleSet
        ``J*Q`` ascending dilations starting at 1.
    """
    if int(J) != J or int(Q) != Q or J < 1 or Q < 1:
        raise ValueError(f"J and Q must be positive integers, got J={J!r}, Q={Q!r}")
    lambdas = 2.0 ** (np.arange(int(J) * int(Q)) / int(Q))
    return ScaleSet(int(J), int(Q), lambdas)


# ---------------------------------------------------------------------------
# Morlet family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MorletParams:
    """Morlet mother wavelet parameters.

    ``omega0`` is the carrier angular frequency in radians per sample.
    The default 6.0 makes the uncorrected wavelet numerically admissible
    (mean below 1e-6 of its l1 norm).
    """

    omega0: float = 6.0

    def __post_init__(self) -> None:
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")

    @classmethod
    def for_quality(cls, Q: int) -> "MorletParams":
        """Carrier placement ``2*pi/(1 + 2**(1/Q))``.

        Puts the first dilation just below the real-signal Nyquist band so
        that every dilation of a Q-per-octave bank stays representable.
        """
        return cls(2.0 * math.pi / (1.0 + 2.0 ** (1.0 / Q)))


def morlet_time(t, params: MorletParams = MorletParams()):
    """Morlet wavelet ``pi**(-1/4) * exp(i*omega0*t) * exp(-t**2/2)``."""
    t = np.asarray(t, dtype=float)
    return np.pi ** -0.25 * np.exp(1j * params.omega0 * t - 0.5 * t * t)


def morlet_freq(omega, params: MorletParams = MorletParams()):
    """Closed-form Morlet frequency response (unitary-transform convention).

    ``pi**(-1/4) * exp(-(omega-omega0)**2/2)`` for ``omega > 0``; the wavelet
    is treated as analytic, so 0 is returned for ``omega <= 0``.  The peak
    value ``pi**(-1/4)`` is attained at ``omega = omega0``.
    """
    omega = np.asarray(omega, dtype=float)
    val = np.pi ** -0.25 * np.exp(-0.5 * (omega - params.omega0) ** 2)
    return np.where(omega > 0, val, 0.0)


# ---------------------------------------------------------------------------
# Gammatone family
# ---------------------------------------------------------------------------


def gammatone_sigma(m: int, r: float, xi: float, B: float) -> float:
    """Damping constant of the order-``m`` Gammatone wavelet.

    Solves the bandwidth condition: the magnitude response dilated to center
    ``xi`` is attenuated by factor ``r`` at the edges of a band of width ``B``.

    Parameters
    ----------
    m : int
        Filter order, at least 2.
    r : float
        Attenuation ratio at the band edges, strictly between 0 and 1.
    xi : float
        Center angular frequency (rad/sample), positive.
    B : float
        Bandwidth (rad/sample), positive.
    """
    if int(m) != m or m < 2:
        raise ValueError(f"order m must be an integer >= 2, got {m!r}")
    if not 0.0 < r < 1.0:
        raise ValueError(f"attenuation r must satisfy 0 < r < 1, got {r!r}")
    if not xi > 0 or not B > 0:
        raise ValueError(f"xi and B must be positive, got xi={xi!r}, B={B!r}")
    rm = r ** (2.0 / m)
    lead = rm * (1.0 - rm) * m * m * xi * xi / 2.0
    root = math.sqrt(1.0 + B * B / ((1.0 - rm) ** 2 * m * m * xi * xi))
    return math.sqrt(lead * (root - 1.0))


@dataclass(frozen=True)
class GammatoneParams:
    """Gammatone mother wavelet parameters (all frequencies in rad/sample).

    ``sigma_g`` is derived from ``(m, r, xi, B)`` via :func:`gammatone_sigma`
    when not given explicitly.  The defaults are the quasi-orthogonal Q = 1
    placement ``xi = 2*pi/(1 + 2**(1/Q))``, ``B = (1 - 2**(-1/Q))*xi``.
    """

    m: int = 4
    Q: float = 1.0
    r: float = 0.5
    xi: float = 2.0 * math.pi / 3.0
    B: float = math.pi / 3.0
    sigma_g: float | None = None

    def __post_init__(self) -> None:
        if self.sigma_g is None:
            object.__setattr__(
                self, "sigma_g", gammatone_sigma(self.m, self.r, self.xi, self.B)
            )
        else:
            if int(self.m) != self.m or self.m < 2:
                raise ValueError(f"order m must be an integer >= 2, got {self.m!r}")
            if not self.sigma_g > 0:
                raise ValueError(f"sigma_g must be positive, got {self.sigma_g!r}")

    @classmethod
    def quasi_orthogonal(cls, Q: float, m: int = 4, r: float = 0.5) -> "GammatoneParams":
        """Quasi-orthogonal placement for a Q-per-octave bank: adjacent
        dilations cross at attenuation ``r``."""
        if not Q >= 1:
            raise ValueError(f"Q must be >= 1, got {Q!r}")
        xi = 2.0 * math.pi / (1.0 + 2.0 ** (1.0 / Q))
        B = (1.0 - 2.0 ** (-1.0 / Q)) * xi
        return cls(m=m, Q=Q, r=r, xi=xi, B=B)


def gammatone_time(t, params: GammatoneParams = GammatoneParams()):
    """Causal Gammatone wavelet, zero for ``t < 0``.

    The wavelet is the derivative of ``t**(m-1) * exp((i*xi - sigma)*t)``:

        ``((m-1)*t**(m-2) + (i*xi - sigma)*t**(m-1)) * exp((i*xi - sigma)*t)``

    which gives an asymmetric envelope and an exactly vanishing integral.
    """
    t = np.asarray(t, dtype=float)
    m, sg, xi = params.m, params.sigma_g, params.xi
    out = np.zeros(t.shape, dtype=complex)
    causal = t >= 0
    tc = t[causal]
    poly = (m - 1) * tc ** (m - 2) + (1j * xi - sg) * tc ** (m - 1)
    out[causal] = poly * np.exp((1j * xi - sg) * tc)
    return out


def gammatone_freq(omega, params: GammatoneParams = GammatoneParams()):
    """Gammatone frequency response ``i*omega*(m-1)! / (sigma + i*(omega-xi))**m``.

    Exact Fourier transform of :func:`gammatone_time` (non-unitary
    convention); in particular the value at ``omega = 0`` is exactly 0.
    """
    omega = np.asarray(omega, dtype=float)
    num = 1j * omega * math.factorial(params.m - 1)
    den = (params.sigma_g + 1j * (omega - params.xi)) ** params.m
    return num / den


@lru_cache(maxsize=None)
def _gammatone_l2_constant(m: int, sigma_g: float, xi: float) -> float:
    """L2 norm of the time-domain Gammatone, via Parseval on the closed form."""
    fac = float(math.factorial(m - 1))

    def integrand(w: float) -> float:
        return (w * fac) ** 2 / (sigma_g ** 2 + (w - xi) ** 2) ** m / (2.0 * math.pi)

    total = 0.0
    for lo, hi in ((-math.inf, 0.0), (0.0, 2.0 * xi), (2.0 * xi, math.inf)):
        val, _ = quad(integrand, lo, hi, limit=200)
        total += val
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# frequency-domain sampling helpers
# ---------------------------------------------------------------------------


def _family_of(params) -> str:
    if isinstance(params, MorletParams):
        return "morlet"
    if isinstance(params, GammatoneParams):
        return "gammatone"
    raise TypeError(f"unsupported wavelet parameter type: {type(params).__name__}")


def _center_frequency(params) -> float:
    return params.omega0 if isinstance(params, MorletParams) else params.xi


def _mother_response(params, omega: np.ndarray) -> np.ndarray:
    """Non-unitary Fourier transform of the unit-energy mother wavelet,
    valid on arbitrary (also negative) angular frequencies."""
    if isinstance(params, MorletParams):
        amp = math.sqrt(2.0 * math.pi) * np.pi ** -0.25
        return amp * np.exp(-0.5 * (omega - params.omega0) ** 2) + 0j
    num = 1j * omega * math.factorial(params.m - 1)
    den = (params.sigma_g + 1j * (omega - params.xi)) ** params.m
    return num / den / _gammatone_l2_constant(params.m, params.sigma_g, params.xi)


def _envelope_response(params, omega: np.ndarray) -> np.ndarray:
    """Spectrum of the mother's own envelope; used for exact DC cancellation.
    Gaussian for Morlet, causal low-pass for Gammatone (keeps causality)."""
    if isinstance(params, MorletParams):
        return np.exp(-0.5 * omega * omega) + 0j
    return math.factorial(params.m - 1) / (params.sigma_g + 1j * omega) ** params.m


def _mother_support(params, cutoff: float = ENVELOPE_CUTOFF) -> tuple[float, float]:
    """Time interval where the mother's envelope exceeds ``cutoff`` of its peak."""
    if isinstance(params, MorletParams):
        T = math.sqrt(-2.0 * math.log(cutoff))
        return -T, T
    t_hi = 10.0 * params.m / params.sigma_g
    while True:
        t = np.linspace(0.0, t_hi, 4096)
        env = np.abs(gammatone_time(t, params))
        above = np.nonzero(env >= cutoff * env.max())[0]
        if above[-1] < t.size - 1:
            return 0.0, float(t[above[-1] + 1])
        t_hi *= 2.0


def _storage_extent(scale_set: ScaleSet, params) -> tuple[int, int]:
    """Integer time window [t_lo, t_hi) that holds every dilated filter."""
    t_lo0, t_hi0 = _mother_support(params)
    lam_max = float(scale_set.lambdas[-1])
    t_lo = math.floor(lam_max * t_lo0) - 1
    t_hi = math.ceil(lam_max * t_hi0) + 1
    if (t_hi - t_lo) % 2:
        t_hi += 1
    return t_lo, t_hi


def transform_length(scale_set: ScaleSet, params, n: int) -> int:
    """Smallest fast FFT length that fits a length-``n`` signal plus the
    support of the coarsest filter (and the bank's own 2x support rule)."""
    t_lo, t_hi = _storage_extent(scale_set, params)
    L = t_hi - t_lo
    return int(next_fast_len(max(n + L, 2 * L)))


# ---------------------------------------------------------------------------
# filter bank
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Sampled wavelet filter bank on a fixed DFT grid.

    ``filters_freq`` holds one frequency response per scale on the grid
    ``omega_k = 2*pi*k/n_fft``; ``filters_time`` the matching compactly
    supported time samples with ``t = 0`` at column ``time_origin``.
    Rows are ordered by ascending dilation (descending center frequency).
    """

    scale_set: ScaleSet
    family: str
    params: MorletParams | GammatoneParams
    n_fft: int
    normalization: str
    filters_freq: np.ndarray  # (K, n_fft) complex
    filters_time: np.ndarray  # (K, L) complex
    time_origin: int
    supports: np.ndarray  # (K, 2) int, per-row [start, stop) inside filters_time
    center_freqs: np.ndarray  # (K,) rad/sample, nominal centers
    lowpass_freq: np.ndarray  # (n_fft,) real
    lowpass_sigma_t: float

    @property
    def n_filters(self) -> int:
        return self.filters_freq.shape[0]

    @property
    def support_length(self) -> int:
        return self.filters_time.shape[1]


def build_filterbank(
    scale_set: ScaleSet,
    params: MorletParams | GammatoneParams,
    n_fft: int,
    normalization: str = "l2",
) -> FilterBank:
    """Sample the dilated wavelet family on the DFT grid of length ``n_fft``.

    Parameters
    ----------
    scale_set : ScaleSet
        Dilation grid from :func:`make_scales`.
    params : MorletParams or GammatoneParams
        Mother wavelet; the family is inferred from the type.
    n_fft : int
        Transform length; must be at least twice the support of the
        coarsest filter.
    normalization : {"l2", "l1"}
        Dilation convention: ``"l2"`` uses ``psi_lam(t) = lam**-0.5 *
        psi(t/lam)`` (scale-invariant energy), ``"l1"`` uses ``1/lam``
        (scale-invariant peak gain).

    Returns
    -------
    FilterBank

    Notes
    -----
    Responses are periodized over ``2*pi`` so the samples agree with
    unit-step time sampling, and each row gets an exact DC cancellation
    (a scaled copy of the family's envelope spectrum is subtracted) so
    the time samples have zero mean.  Time rows are truncated where the
    envelope falls below 1e-5 of its peak.
    """
    family = _family_of(params)
    if normalization not in ("l2", "l1"):
        raise ValueError(f"normalization must be 'l2' or 'l1', got {normalization!r}")
    center0 = _center_frequency(params)
    if center0 >= 2.0 * math.pi:
        raise ValueError(
            f"mother center frequency {center0:.4f} rad/sample is not "
            "representable on a unit-step grid (needs < 2*pi)"
        )

    lambdas = scale_set.lambdas
    K = lambdas.size
    t_lo, t_hi = _storage_extent(scale_set, params)
    L_store = t_hi - t_lo
    if n_fft < 2 * L_store:
        raise FilterSupportError(
            f"coarsest filter support {L_store} requires n_fft >= {2 * L_store}, "
            f"got {n_fft}"
        )

    omega = 2.0 * math.pi * np.arange(n_fft) / n_fft
    shifts = 2.0 * math.pi * np.arange(-_WRAP_PERIODS, _WRAP_PERIODS + 1)
    grid = omega[None, :] + shifts[:, None]  # (periods, n_fft)

    rows = np.empty((K, n_fft), dtype=complex)
    for k, lam in enumerate(lambdas):
        arg = lam * grid
        resp = _mother_response(params, arg).sum(axis=0)
        env = _envelope_response(params, arg).sum(axis=0)
        resp = resp * (math.sqrt(lam) if normalization == "l2" else 1.0)
        rows[k] = resp - (resp[0] / env[0]) * env

    time_full = np.fft.ifft(rows, axis=1)
    cols = np.arange(t_lo, t_hi) % n_fft
    filters_time = np.ascontiguousarray(time_full[:, cols])
    if family == "gammatone":
        # causal family: t < 0 is exactly zero; drop the residue the finite
        # frequency periodization leaves there (it can exceed the envelope
        # cutoff for the finest scale)
        filters_time[:, :-t_lo] = 0.0
    supports = np.empty((K, 2), dtype=int)
    for k in range(K):
        env = np.abs(filters_time[k])
        idx = np.nonzero(env >= ENVELOPE_CUTOFF * env.max())[0]
        a, b = int(idx[0]), int(idx[-1]) + 1
        filters_time[k, :a] = 0.0
        filters_time[k, b:] = 0.0
        filters_time[k, a:b] -= filters_time[k, a:b].mean()
        supports[k] = (a, b)

    sigma_t = 2.0 ** scale_set.J / 2.0
    wrapped = (omega + math.pi) % (2.0 * math.pi) - math.pi
    lowpass = np.exp(-0.5 * (sigma_t * wrapped) ** 2)

    return FilterBank(
        scale_set=scale_set,
        family=family,
        params=params,
        n_fft=int(n_fft),
        normalization=normalization,
        filters_freq=rows,
        filters_time=filters_time,
        time_origin=-t_lo,
        supports=supports,
        center_freqs=center0 / lambdas,
        lowpass_freq=lowpass,
        lowpass_sigma_t=sigma_t,
    )


# ---------------------------------------------------------------------------
# local analysis frame
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalFrame:
    """Explicit analysis matrix at one output position, with its duals.

    ``W`` has one analysis vector per row (coefficients are ``W @ y``),
    ``Wd`` is the Moore-Penrose pseudoinverse (columns are the
    dual/reconstruction vectors).  ``gram_analysis[i, j] = <w_i, w_j>``
    over rows of ``W``; ``gram_dual[i, j] = <d_i, d_j>`` over columns of
    ``Wd``.  Both are Hermitian.
    """

    W: np.ndarray
    Wd: np.ndarray
    gram_dual: np.ndarray
    gram_analysis: np.ndarray
    l1_norms: np.ndarray
    singular_values: np.ndarray
    rank: int

    @property
    def n_filters(self) -> int:
        return self.W.shape[0]

    @property
    def signal_length(self) -> int:
        return self.W.shape[1]

    @classmethod
    def from_matrix(cls, W) -> "LocalFrame":
        """Build the frame bundle from an arbitrary analysis matrix.

        The pseudoinverse comes from an SVD with relative cutoff
        ``max(K, L) * eps * s_max``; discarded singular values trigger a
        :class:`FrameRankWarning` (not an error).
        """
        W = np.atleast_2d(np.asarray(W))
        if W.dtype.kind not in "fc":
            W = W.astype(float)
        K, L = W.shape
        U, s, Vh = np.linalg.svd(W, full_matrices=False)
        cutoff = max(K, L) * np.finfo(s.dtype).eps * (s[0] if s.size else 0.0)
        rank = int(np.count_nonzero(s > cutoff))
        if rank < min(K, L):
            warnings.warn(
                f"rank-deficient frame: kept {rank} of {min(K, L)} singular values",
                FrameRankWarning,
                stacklevel=2,
            )
        inv = np.zeros_like(s)
        inv[:rank] = 1.0 / s[:rank]
        Wd = (Vh.conj().T * inv) @ U.conj().T

        gram_dual = Wd.conj().T @ Wd
        gram_dual = 0.5 * (gram_dual + gram_dual.conj().T)
        gram_analysis = W.conj() @ W.T
        gram_analysis = 0.5 * (gram_analysis + gram_analysis.conj().T)
        return cls(
            W=W,
            Wd=Wd,
            gram_dual=gram_dual,
            gram_analysis=gram_analysis,
            l1_norms=np.abs(W).sum(axis=1),
            singular_values=s,
            rank=rank,
        )


def local_frame(bank: FilterBank, L: int | None = None) -> LocalFrame:
    """Stack the bank's time-domain filters at one output position.

    The analysis rows are the conjugated filter samples, so the frame
    coefficients of a window match the transform's inner products
    ``<y, psi_lam(. - t)>``.

    Parameters
    ----------
    bank : FilterBank
    L : int, optional
        Common support length; defaults to the full stored support.  When
        smaller, the length-``L`` window retaining the most total filter
        energy is used (one shared window, so rows stay aligned).
    """
    T = bank.filters_time
    L_store = T.shape[1]
    if L is None:
        L = L_store
    if not 1 <= L <= L_store:
        raise ValueError(f"window length {L} must be in [1, {L_store}]")
    if L < L_store:
        energy = (np.abs(T) ** 2).sum(axis=0)
        csum = np.concatenate([[0.0], np.cumsum(energy)])
        start = int(np.argmax(csum[L:] - csum[:-L]))
        T = T[:, start : start + L]
    return LocalFrame.from_matrix(np.conj(T))
