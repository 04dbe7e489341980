"""Brute-force and Monte-Carlo reference implementations.

Everything here exists to check the analytic risk machinery against
slower, independently derived ground truth: exhaustive enumeration of
keep masks, sampled reconstruction error, and the four Moore-Penrose
identities.  Nothing in the processing pipeline depends on this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import LocalFrame

__all__ = [
    "EnumerationResult",
    "MoorePenroseReport",
    "brute_force_ideal_mask",
    "mc_realized_mse",
    "verify_moore_penrose",
]

# Exhaustive search is 2**K; refuse anything that would not finish promptly.
MAX_ENUMERATION_SIZE = 20
_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class EnumerationResult:
    """Outcome of an exhaustive mask search."""

    best_delta: np.ndarray
    best_risk: float
    risks: np.ndarray | None  # per-mask risks in counting order, if requested

    @property
    def best_index(self) -> int:
        """Counting-order index of the winning mask (bit k = delta_k)."""
        return int((self.best_delta.astype(np.uint64) << np.arange(self.best_delta.size, dtype=np.uint64)).sum())


def _risk_matrices(x_coeffs, frame: LocalFrame, sigma: float):
    """Pairwise risk matrices: mask risk is ``u@A@u + s@B@s`` for
    unselected indicator ``u`` and selected indicator ``s``."""
    mu = np.asarray(x_coeffs)
    if mu.ndim != 1 or mu.size != frame.n_filters:
        raise ValueError(f"expected {frame.n_filters} coefficients, got shape {mu.shape}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    A = np.real(mu.conj()[:, None] * mu[None, :] * frame.gram_dual)
    B = sigma * sigma * np.real(frame.gram_dual * frame.gram_analysis)
    return A, B


def brute_force_ideal_mask(
    x_coeffs,
    frame: LocalFrame,
    sigma: float,
    keep_all: bool = False,
) -> EnumerationResult:
    """Enumerate all ``2**K`` keep masks and return the risk minimizer.

    Ground-truth oracle for the ideal risk: evaluates
    :func:`~sparsescat.thresholding.ideal_risk_given_mask` for every
    mask (via the equivalent quadratic forms) and takes the argmin.
    The first minimizer in counting order (mask bits = binary digits of
    the mask index, least significant bit first) breaks ties, so the
    result is deterministic.

    Parameters
    ----------
    x_coeffs : array_like, shape (K,)
        Clean frame coefficients; ``K`` must be at most 20.
    frame : LocalFrame
    sigma : float
        Noise standard deviation.
    keep_all : bool
        Also return the full per-mask risk vector.
    """
    A, B = _risk_matrices(x_coeffs, frame, sigma)
    K = A.shape[0]
    if K > MAX_ENUMERATION_SIZE:
        raise ValueError(
            f"enumeration over 2**{K} masks refused (limit K <= {MAX_ENUMERATION_SIZE})"
        )
    total = 1 << K
    bits = np.arange(K)
    best_risk = math.inf
    best_index = 0
    risks_all = np.empty(total) if keep_all else None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, total))
        S = ((idx[:, None] >> bits[None, :]) & 1).astype(float)
        U = 1.0 - S
        risks = np.einsum("mi,ij,mj->m", U, A, U) + np.einsum("mi,ij,mj->m", S, B, S)
        if keep_all:
            risks_all[idx] = risks
        local = int(np.argmin(risks))
        if risks[local] < best_risk:
            best_risk = float(risks[local])
            best_index = int(idx[local])
    best_delta = ((best_index >> bits) & 1).astype(np.uint8)
    return EnumerationResult(best_delta=best_delta, best_risk=best_risk, risks=risks_all)


def mc_realized_mse(
    x,
    frame: LocalFrame,
    sigma: float,
    delta,
    draws: int = 1000,
    rng=None,
) -> tuple[float, float]:
    """Monte-Carlo reconstruction error of a fixed keep mask.

    Draws ``eps ~ N(0, sigma**2 I)``, masks the noisy analysis
    coefficients, re-synthesizes with the duals, and averages
    ``||x - reconstruction||**2``.

    Parameters
    ----------
    x : array_like, shape (L,)
        Clean signal in the sample domain.
    frame : LocalFrame
    sigma : float
    delta : array_like, shape (K,)
        Keep mask.
    draws : int
        Number of noise draws, at least 100.
    rng : numpy Generator or seed, optional

    Returns
    -------
    (mean, stderr) : tuple of float
        Sample mean and its standard error.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != frame.signal_length:
        raise ValueError(f"expected a length-{frame.signal_length} signal, got shape {x.shape}")
    delta = np.asarray(delta, dtype=float)
    if delta.shape != (frame.n_filters,):
        raise ValueError(f"expected a length-{frame.n_filters} mask, got shape {delta.shape}")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma!r}")
    if draws < 100:
        raise ValueError(f"draws must be at least 100, got {draws}")
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    eps = gen.normal(0.0, sigma, size=(x.size, int(draws))) if sigma > 0 else np.zeros((x.size, int(draws)))
    coeffs = frame.W @ (x[:, None] + eps)
    recon = frame.Wd @ (delta[:, None] * coeffs)
    errs = (np.abs(x[:, None] - recon) ** 2).sum(axis=0)
    mean = float(errs.mean())
    stderr = float(errs.std(ddof=1) / math.sqrt(errs.size))
    return mean, stderr


@dataclass(frozen=True, eq=False)
class MoorePenroseReport:
    """Relative residuals of the four pseudoinverse identities."""

    residuals: dict[str, float]
    tol: float
    passed: bool

    def __bool__(self) -> bool:
        return self.passed


def verify_moore_penrose(frame: LocalFrame, tol: float = 1e-8) -> MoorePenroseReport:
    """Check ``W Wd W = W``, ``Wd W Wd = Wd``, and Hermitian symmetry of
    both projectors, each as a relative Frobenius residual against ``tol``."""
    W, Wd = frame.W, frame.Wd

    def rel(err: np.ndarray, ref: np.ndarray) -> float:
        denom = np.linalg.norm(ref)
        return float(np.linalg.norm(err) / (denom if denom > 0 else 1.0))

    P = W @ Wd
    R = Wd @ W
    residuals = {
        "W Wd W = W": rel(P @ W - W, W),
        "Wd W Wd = Wd": rel(R @ Wd - Wd, Wd),
        "(W Wd)^H = W Wd": rel(P.conj().T - P, P),
        "(Wd W)^H = Wd W": rel(R.conj().T - R, R),
    }
    passed = all(v <= tol for v in residuals.values())
    return MoorePenroseReport(residuals=residuals, tol=tol, passed=passed)
