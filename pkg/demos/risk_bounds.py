#!/usr/bin/env python3
"""Compare the closed-form risk bound against exhaustive mask search.

A small overcomplete frame keeps every quantity printable: the script
enumerates all keep masks, shows where the bound's own selection lands,
and confirms the winner's closed-form risk with a Monte-Carlo run.
The orthonormal special case is shown last.
"""

import numpy as np

from sparsescat import LocalFrame
from sparsescat.oracle import brute_force_ideal_mask, mc_realized_mse
from sparsescat.thresholding import (
    ideal_risk_given_mask,
    risk_selected,
    risk_unselected,
    upper_bound_risk,
)

rng = np.random.default_rng(42)
K, L = 5, 3
W = rng.normal(size=(K, L))
W /= np.linalg.norm(W, axis=1, keepdims=True)
frame = LocalFrame.from_matrix(W)
x = rng.normal(size=L)
mu = frame.W @ x
sigma = 0.6

print(f"frame: {K} analysis rows over {L} samples, sigma = {sigma}")
print(f"clean coefficients: {np.round(mu, 3)}")
print(f"per-coefficient risk terms  a (discard): {np.round(risk_unselected(mu, frame), 3)}")
print(f"                            b (keep):    {np.round(risk_selected(frame, sigma), 3)}")

result = brute_force_ideal_mask(mu, frame, sigma, keep_all=True)
up = upper_bound_risk(mu, frame, sigma)
print(f"\nenumerated {result.risks.size} masks")
order = np.argsort(result.risks)
print(f"{'mask':>6} {'risk':>8}")
for m in order[:5]:
    bits = (m >> np.arange(K)) & 1
    print(f"{''.join(map(str, bits)):>6} {result.risks[m]:8.4f}")
print(f"best mask {result.best_delta} risk {result.best_risk:.4f}")
print(f"closed-form bound {up:.4f} (never below the best: {up >= result.best_risk})")

mc, se = mc_realized_mse(x, frame, sigma, result.best_delta, draws=20000, rng=rng)
exact = ideal_risk_given_mask(mu, frame, sigma, result.best_delta)
print(f"\nMonte-Carlo risk of the winner: {mc:.4f} +- {se:.4f} (closed form {exact:.4f})")

print("\n=== orthonormal special case ===")
Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
fr_o = LocalFrame.from_matrix(Q)
mu_o = Q @ rng.normal(size=4)
ref = float(np.minimum(mu_o ** 2, sigma ** 2).sum())
print(f"bound {upper_bound_risk(mu_o, fr_o, sigma):.6f} == sum min(mu^2, sigma^2) {ref:.6f}")
