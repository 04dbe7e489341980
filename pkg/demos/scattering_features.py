#!/usr/bin/env python3
"""Sparse vs dense scattering features on tone-like signals.

Extracts two-layer scattering features from a plain tone and an
AM-modulated tone, shows that the second layer separates them, and
measures how much each feature vector moves when noise is added
(the sparse network should move less).
"""

import numpy as np

import sparsescat as ss

n = 4096
t = np.arange(n)
tone = np.sin(0.2 * t)
am_tone = (1.0 + 0.5 * np.sin(0.01 * t)) * np.sin(0.2 * t)

cfg = ss.ScatteringConfig(
    layer1=ss.LayerSpec(5, 8),
    layer2=ss.LayerSpec(4, 1),
    window=4096,
    estimator="std",
    noise_on="modulus",
)
net = ss.ScatteringNetwork(cfg, n)
net_dense = ss.ScatteringNetwork(cfg.dense(), n)

f_tone = net.forward(tone)
f_am = net.forward(am_tone)
k1 = net.bank1.n_filters
print(f"feature vector: {f_tone.size} entries "
      f"({k1} first-layer + {f_tone.size - k1} second-layer)")
l2_tone = np.linalg.norm(f_tone[k1:])
l2_am = np.linalg.norm(f_am[k1:])
print(f"second-layer energy: tone {l2_tone:.4f}, AM tone {l2_am:.4f} "
      f"(modulation lights up layer 2: {l2_am > 2 * l2_tone})")

print("\nstability under additive noise at 5 dB SNR (10 seeds):")
ratios = []
for seed in range(10):
    rng = np.random.default_rng(seed)
    y = tone if seed % 2 == 0 else am_tone
    sigma = float(np.sqrt(np.mean(y ** 2))) / 10 ** (5 / 20)
    eps = sigma * rng.normal(size=n)
    base_s, base_d = net.forward(y), net_dense.forward(y)
    move_s = np.linalg.norm(net.forward(y + eps) - base_s) / np.linalg.norm(base_s)
    move_d = np.linalg.norm(net_dense.forward(y + eps) - base_d) / np.linalg.norm(base_d)
    ratios.append(move_s / move_d)
    print(f"  seed {seed}: sparse {move_s:.4f}  dense {move_d:.4f}  ratio {move_s / move_d:.3f}")
print(f"mean sparse/dense perturbation ratio: {np.mean(ratios):.3f}")
