#!/usr/bin/env python3
"""Build both wavelet filter banks and inspect their structure.

Prints the dilation grid, per-row center frequencies, support lengths,
norms, and the structural guarantees (zero mean, causality), then round
trips one bank through its on-disk form.
"""

import tempfile
from pathlib import Path

import numpy as np

import sparsescat as ss

n = 4096

print("=== Morlet bank, J=4, Q=2 ===")
scales = ss.make_scales(4, 2)
params = ss.MorletParams.for_quality(2)
bank = ss.build_filterbank(scales, params, ss.transform_length(scales, params, n))
print(f"carrier omega0 = {params.omega0:.4f} rad/sample, n_fft = {bank.n_fft}")
print(f"{'row':>3} {'lambda':>8} {'center':>8} {'support':>8} {'l2 norm':>8}")
for k, lam in enumerate(bank.scale_set.lambdas):
    a, b = bank.supports[k]
    norm = np.linalg.norm(bank.filters_time[k])
    print(f"{k:>3} {lam:8.3f} {bank.center_freqs[k]:8.4f} {b - a:>8} {norm:8.4f}")

mean_ratio = np.abs(bank.filters_time.sum(axis=1)) / np.abs(bank.filters_time).sum(axis=1)
print(f"zero-mean check: max |sum|/l1 = {mean_ratio.max():.2e}")

print("\n=== Gammatone bank, J=4, Q=1 ===")
scales = ss.make_scales(4, 1)
params = ss.GammatoneParams.quasi_orthogonal(1)
bank_g = ss.build_filterbank(scales, params, ss.transform_length(scales, params, n))
print(f"xi = {params.xi:.4f}, B = {params.B:.4f}, sigma_g = {params.sigma_g:.6f}")
pre = bank_g.filters_time[:, : bank_g.time_origin]
print(f"causality: {pre.size} samples before t=0, all zero: {bool(np.all(pre == 0))}")
print(f"center frequencies: {np.round(bank_g.center_freqs, 4)}")

print("\n=== serialization round trip ===")
with tempfile.TemporaryDirectory() as tmp:
    stem = Path(tmp) / "bank"
    ss.save_filterbank(bank_g, stem)
    size = stem.with_suffix(".fcm").stat().st_size
    back = ss.load_filterbank(stem)
    same = np.array_equal(back.filters_freq, bank_g.filters_freq)
    print(f"wrote {size} bytes, reload bit-exact: {same}")
    print(f"content hash: {ss.filterbank_hash(back)}")
