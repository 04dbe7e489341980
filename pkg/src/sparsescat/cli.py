"""Command-line interface.

Subcommands
-----------
``scalogram``  wavelet magnitudes of a WAV file (CSV + binary + sidecar)
``denoise``    thresholded scalogram, mask, and sparsity report
``scatter``    scattering feature vectors for one or more WAV files
``selfcheck``  fast internal consistency checks (exit 3 on failure)

Exit codes: 0 success, 1 usage error, 2 I/O or format error,
3 numerical check failure.  All commands are deterministic given the
input bytes, the configuration, and the seed.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import fileio
from .fileio import FileFormatError, write_csv, write_json, write_matrix
from .frames import (
    GammatoneParams,
    MorletParams,
    build_filterbank,
    local_frame,
    make_scales,
    transform_length,
)
from .oracle import brute_force_ideal_mask, verify_moore_penrose
from .scattering import LayerSpec, ScatteringConfig, ScatteringNetwork
from .thresholding import (
    apply_mask,
    risk_selected,
    sparsity_ratio,
    threshold_mask,
    upper_bound_risk,
)
from .transform import Signal, cwt, modulus

__all__ = ["RunConfig", "UsageError", "main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    """Bad arguments or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # route argparse failures to exit code 1
        raise UsageError(message)


_BOOL_STRINGS = {"true": True, "1": True, "yes": True, "on": True,
                 "false": False, "0": False, "no": False, "off": False}


def _parse_bool(text: str) -> bool:
    try:
        return _BOOL_STRINGS[text.strip().lower()]
    except KeyError:
        raise UsageError(f"expected a boolean, got {text!r}") from None


def _parse_optional(cast):
    def parse(text):
        if isinstance(text, str) and text.strip().lower() in ("", "none", "auto"):
            return None
        return cast(text)

    return parse


@dataclass
class RunConfig:
    """Flat key=value configuration covering every module parameter.

    Files may be ``key = value`` lines (``#`` comments allowed) or a
    JSON object with the same keys.  Unknown keys are rejected.
    """

    family: str = "morlet"
    family2: str | None = None  # defaults to family
    j1: int = 5
    q1: int = 8
    j2: int = 4
    q2: int = 1
    omega0: float | None = None  # None: place the carrier from the quality factor
    omega0_2: float | None = None
    gammatone_m: int = 4
    gammatone_r: float = 0.5
    window: int = 2 ** 16
    estimator: str = "mad"
    estimator_constant: float | None = None
    noise_on: str = "real"
    normalization: str = "l2"
    compat_pseudocode: bool = False
    decimation1: int | None = None  # None: 2**j1
    decimation2: int | None = None
    zero_tol: float = 0.0
    sparse: bool = True
    sigma: float | None = None
    seed: int = 0
    time_average: bool = True

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**mapping)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            import json

            try:
                mapping = json.loads(text)
            except json.JSONDecodeError as exc:
                raise UsageError(f"bad JSON config: {exc}") from None
            if not isinstance(mapping, dict):
                raise UsageError("JSON config must be an object")
            return cls.from_mapping(mapping)
        mapping: dict = {}
        casts = _config_casts()
        for lineno, line in enumerate(text.splitlines(), start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise UsageError(f"config line {lineno}: expected key=value, got {body!r}")
            key, _, value = body.partition("=")
            key = key.strip()
            if key not in casts:
                raise UsageError(f"config line {lineno}: unknown key {key!r}")
            try:
                mapping[key] = casts[key](value.strip())
            except UsageError:
                raise
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config line {lineno}: {exc}") from None
        return cls.from_mapping(mapping)

    # -- derived objects ---------------------------------------------------

    def _wavelet_params(self, layer: int):
        family = self.family if layer == 1 else (self.family2 or self.family)
        quality = self.q1 if layer == 1 else self.q2
        omega0 = self.omega0 if layer == 1 else self.omega0_2
        if family == "morlet":
            return MorletParams(omega0) if omega0 is not None else MorletParams.for_quality(quality)
        if family == "gammatone":
            return GammatoneParams.quasi_orthogonal(
                quality, m=self.gammatone_m, r=self.gammatone_r
            )
        raise UsageError(f"family must be 'morlet' or 'gammatone', got {family!r}")

    def layer_spec(self, layer: int) -> LayerSpec:
        if layer == 1:
            return LayerSpec(self.j1, self.q1, self.family, self._wavelet_params(1),
                             self.decimation1)
        return LayerSpec(self.j2, self.q2, self.family2 or self.family,
                         self._wavelet_params(2), self.decimation2)

    def scattering_config(self) -> ScatteringConfig:
        return ScatteringConfig(
            layer1=self.layer_spec(1),
            layer2=self.layer_spec(2),
            window=self.window,
            sparse=self.sparse,
            estimator=self.estimator,
            estimator_constant=self.estimator_constant,
            sigma=self.sigma,
            noise_on=self.noise_on,
            compat_pseudocode=self.compat_pseudocode,
            normalization=self.normalization,
            time_average=self.time_average,
        )

    def build_bank(self, n: int):
        scales = make_scales(self.j1, self.q1)
        params = self._wavelet_params(1)
        return build_filterbank(
            scales, params, transform_length(scales, params, n), self.normalization
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _config_casts() -> dict:
    return {
        "family": str, "family2": _parse_optional(str),
        "j1": int, "q1": int, "j2": int, "q2": int,
        "omega0": _parse_optional(float), "omega0_2": _parse_optional(float),
        "gammatone_m": int, "gammatone_r": float,
        "window": int,
        "estimator": str, "estimator_constant": _parse_optional(float),
        "noise_on": str, "normalization": str,
        "compat_pseudocode": _parse_bool,
        "decimation1": _parse_optional(int), "decimation2": _parse_optional(int),
        "zero_tol": float, "sparse": _parse_bool,
        "sigma": _parse_optional(float), "seed": int,
        "time_average": _parse_bool,
    }


# ---------------------------------------------------------------------------
# command plumbing
# ---------------------------------------------------------------------------


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides: dict = {}
    if getattr(args, "sparse", None) is not None:
        overrides["sparse"] = args.sparse
    if getattr(args, "window", None) is not None:
        overrides["window"] = args.window
    if getattr(args, "estimator", None) is not None:
        overrides["estimator"] = args.estimator
    if getattr(args, "compat_pseudocode", False):
        overrides["compat_pseudocode"] = True
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        cfg = replace(cfg, **overrides)
    if cfg.window < 2:
        raise UsageError(f"window must be at least 2, got {cfg.window}")
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out) if args.out else Path.cwd()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_signal(path) -> tuple[Signal, int]:
    samples, rate = fileio.read_wav(path)
    return Signal(samples, sample_rate=rate), rate


def cmd_scalogram(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    sig, rate = _read_signal(args.input)
    sig = sig.normalized()
    bank = cfg.build_bank(len(sig))
    scal = cwt(sig, bank)
    alpha = sparsity_ratio(scal.coeffs, cfg.zero_tol)
    stem = out / Path(args.input).stem
    write_csv(stem.with_suffix(".scalogram.csv"), modulus(scal))
    write_matrix(stem.with_suffix(".scalogram.fcm"), scal.coeffs)
    write_json(
        stem.with_suffix(".meta.json"),
        {
            "input": Path(args.input).name,
            "sample_rate": rate,
            "alpha": alpha,
            "shape": list(scal.coeffs.shape),
            "bank": fileio.bank_metadata(bank),
            "config": cfg.as_dict(),
        },
    )
    print(f"alpha={alpha:.6f}")
    return EXIT_OK


def cmd_denoise(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    sig, rate = _read_signal(args.input)
    sig = sig.normalized()
    bank = cfg.build_bank(len(sig))
    frame = local_frame(bank)
    scal = cwt(sig, bank)
    mask, _ = threshold_mask(
        scal,
        frame,
        window=cfg.window,
        estimator=cfg.estimator,
        constant=cfg.estimator_constant,
        sigma=cfg.sigma,
        noise_on=cfg.noise_on,
        compat_pseudocode=cfg.compat_pseudocode,
    )
    thresholded = apply_mask(scal, mask)
    alpha_before = sparsity_ratio(scal.coeffs, cfg.zero_tol)
    alpha_after = sparsity_ratio(thresholded.coeffs, cfg.zero_tol)
    stem = out / Path(args.input).stem
    write_csv(stem.with_suffix(".noisy.csv"), modulus(scal))
    write_matrix(stem.with_suffix(".noisy.fcm"), scal.coeffs)
    write_csv(stem.with_suffix(".denoised.csv"), modulus(thresholded))
    write_matrix(stem.with_suffix(".denoised.fcm"), thresholded.coeffs)
    write_csv(stem.with_suffix(".mask.csv"), mask.delta)
    write_matrix(stem.with_suffix(".mask.fcm"), mask.delta.astype(float))
    write_json(
        stem.with_suffix(".meta.json"),
        {
            "input": Path(args.input).name,
            "sample_rate": rate,
            "alpha_before": alpha_before,
            "alpha_after": alpha_after,
            "bank": fileio.bank_metadata(bank),
            "config": cfg.as_dict(),
        },
    )
    print(f"alpha_before={alpha_before:.6f} alpha_after={alpha_after:.6f}")
    return EXIT_OK


def cmd_scatter(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    scfg = cfg.scattering_config()
    failures: list[str] = []
    for path in args.inputs:  # input order is preserved in the outputs
        try:
            sig, rate = _read_signal(path)
            net = ScatteringNetwork(scfg, len(sig))
            feats = net.forward(sig)
            if not np.all(np.isfinite(feats)):
                raise ArithmeticError("non-finite feature values")
            stem = out / Path(path).stem
            write_matrix(stem.with_suffix(".features.fcm"), feats[None, :])
            write_json(
                stem.with_suffix(".features.json"),
                {
                    "input": Path(path).name,
                    "sample_rate": rate,
                    "length": int(feats.size),
                    "layout": "layer1-scales, then layer2 (new scale slow, layer1 scale fast)",
                    "sparse": cfg.sparse,
                    "bank1": fileio.bank_metadata(net.bank1),
                    "bank2": fileio.bank_metadata(net.bank2),
                    "config": cfg.as_dict(),
                },
            )
            print(f"{path}: {feats.size} features")
        except (OSError, FileFormatError, ValueError, ArithmeticError) as exc:
            failures.append(f"{path}: {exc}")
            print(f"error: {path}: {exc}", file=sys.stderr)
    if failures:
        return EXIT_IO
    return EXIT_OK


def _selfcheck_lines(cfg: RunConfig) -> tuple[list[str], bool]:
    from .frames import LocalFrame

    rng = np.random.default_rng(cfg.seed)
    lines: list[str] = []
    ok = True

    def record(name: str, passed: bool, detail: str) -> None:
        nonlocal ok
        ok = ok and passed
        lines.append(f"[{'PASS' if passed else 'FAIL'}] {name} ({detail})")

    # orthonormal coincidence: min(a, b) reduces to min(mu^2, sigma^2)
    if cfg.compat_pseudocode:
        lines.append("[SKIP] orthonormal-coincidence (compatibility mode, skipped)")
    else:
        worst = 0.0
        for _ in range(20):
            K = int(rng.integers(2, 9))
            Wmat, _ = np.linalg.qr(rng.normal(size=(K, K)))
            fr = LocalFrame.from_matrix(Wmat)
            x = rng.normal(size=K)
            mu = Wmat @ x
            sigma = float(rng.uniform(0.1, 2.0))
            ref = float(np.minimum(mu ** 2, sigma ** 2).sum())
            got = upper_bound_risk(mu, fr, sigma)
            worst = max(worst, abs(got - ref) / ref)
        record("orthonormal-coincidence", worst <= 1e-9, f"max rel err {worst:.2e}")

    # forced all-ones mask: risk is data independent
    worst = 0.0
    for _ in range(20):
        K, L = int(rng.integers(3, 8)), int(rng.integers(2, 6))
        fr = LocalFrame.from_matrix(rng.normal(size=(K, L)))
        sigma = float(rng.uniform(0.1, 2.0))
        b_sum = float(risk_selected(fr, sigma).sum())
        from .thresholding import masked_upper_bound_risk

        ones = np.ones(K)
        v1 = masked_upper_bound_risk(rng.normal(size=K), fr, sigma, ones)
        v2 = masked_upper_bound_risk(rng.normal(size=K), fr, sigma, ones)
        worst = max(worst, abs(v1 - b_sum), abs(v2 - b_sum))
    record("full-selection-equality", worst <= 1e-12, f"max abs err {worst:.2e}")

    # pseudoinverse identities on random frames
    worst = 0.0
    for _ in range(10):
        K, L = int(rng.integers(3, 10)), int(rng.integers(2, 8))
        fr = LocalFrame.from_matrix(rng.normal(size=(K, L)))
        rep = verify_moore_penrose(fr)
        worst = max(worst, max(rep.residuals.values()))
    record("moore-penrose-identities", worst <= 1e-8, f"max residual {worst:.2e}")

    # small brute-force dominance probe
    margin = math.inf
    for _ in range(25):
        K, L = 4, 3
        fr = LocalFrame.from_matrix(rng.normal(size=(K, L)))
        x = rng.normal(size=L)
        sigma = float(rng.uniform(0.1, 1.0))
        mu = fr.W @ x
        up = upper_bound_risk(mu, fr, sigma)
        best = brute_force_ideal_mask(mu, fr, sigma).best_risk
        margin = min(margin, up - best)
    record("dominance-probe", margin >= -1e-10, f"min margin {margin:.3e}")

    return lines, ok


def cmd_selfcheck(args) -> int:
    cfg = _load_config(args)
    lines, ok = _selfcheck_lines(cfg)
    for line in lines:
        print(line)
    return EXIT_OK if ok else EXIT_NUMERIC


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value or JSON configuration file")
    sub.add_argument("--out", help="output directory (default: current)")
    sub.add_argument("--seed", type=int, default=None, help="RNG seed for checks")
    sub.add_argument("--window", type=int, default=None, help="threshold window length")
    sub.add_argument("--estimator", choices=("mad", "std"), default=None,
                     help="noise estimator")
    sub.add_argument("--sparse", dest="sparse", action="store_true", default=None,
                     help="enable thresholding")
    sub.add_argument("--no-sparse", dest="sparse", action="store_false",
                     help="disable thresholding")
    sub.add_argument("--compat-pseudocode", action="store_true",
                     help="legacy selected-risk variant")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sparsescat", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scalogram", help="wavelet magnitudes of a WAV file")
    p.add_argument("input", help="input WAV (PCM)")
    _add_common(p)
    p.set_defaults(func=cmd_scalogram)

    p = sub.add_parser("denoise", help="risk-thresholded scalogram of a WAV file")
    p.add_argument("input", help="input WAV (PCM)")
    _add_common(p)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("scatter", help="scattering features for WAV files")
    p.add_argument("inputs", nargs="+", help="input WAV files (PCM)")
    _add_common(p)
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("selfcheck", help="internal consistency checks")
    _add_common(p)
    p.set_defaults(func=cmd_selfcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
