"""File formats: FCM1 binary matrices, PCM WAV input, JSON sidecars.

The binary matrix container is deliberately minimal: magic ``FCM1``,
little-endian u32 row and column counts, a u8 dtype tag (0 = float64,
1 = complex128 stored as interleaved float64 pairs), then the row-major
little-endian payload.  Round trips are bit-exact.

The WAV reader is a small RIFF parser rather than a library call so
that malformed files are rejected with the exact byte offset of the
problem.  PCM only: 16- or 32-bit integers or 32-bit floats, any
channel count (channels are averaged down to mono), no resampling.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .frames import (
    FilterBank,
    GammatoneParams,
    MorletParams,
    build_filterbank,
    make_scales,
)

__all__ = [
    "FileFormatError",
    "WavFormatError",
    "write_matrix",
    "read_matrix",
    "write_csv",
    "write_json",
    "read_json",
    "read_wav",
    "write_wav",
    "filterbank_hash",
    "bank_metadata",
    "save_filterbank",
    "load_filterbank",
]

MAGIC = b"FCM1"
_HEADER = struct.Struct("<4sIIB")
_DTYPE_REAL = 0
_DTYPE_COMPLEX = 1


class FileFormatError(Exception):
    """A file does not conform to its declared format.

    ``offset`` is the byte position of the violation when known.
    """

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class WavFormatError(FileFormatError):
    """A WAV file is corrupt or uses an unsupported encoding."""


# ---------------------------------------------------------------------------
# FCM1 matrices
# ---------------------------------------------------------------------------


def write_matrix(path, matrix) -> None:
    """Write a 2-D real or complex matrix as an FCM1 file."""
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError(f"FCM1 stores 2-D matrices, got shape {m.shape}")
    if m.dtype.kind == "c":
        tag, payload = _DTYPE_COMPLEX, np.ascontiguousarray(m.astype("<c16"))
    else:
        tag, payload = _DTYPE_REAL, np.ascontiguousarray(m.astype("<f8"))
    header = _HEADER.pack(MAGIC, m.shape[0], m.shape[1], tag)
    Path(path).write_bytes(header + payload.tobytes())


def read_matrix(path) -> np.ndarray:
    """Read an FCM1 file back into a float64 or complex128 matrix."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FileFormatError("truncated header", offset=len(data))
    magic, rows, cols, tag = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FileFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", offset=0)
    if tag == _DTYPE_REAL:
        dtype, itemsize = np.dtype("<f8"), 8
    elif tag == _DTYPE_COMPLEX:
        dtype, itemsize = np.dtype("<c16"), 16
    else:
        raise FileFormatError(f"unknown dtype tag {tag}", offset=12)
    expected = rows * cols * itemsize
    payload = data[_HEADER.size :]
    if len(payload) != expected:
        raise FileFormatError(
            f"payload holds {len(payload)} bytes, header promises {expected}",
            offset=_HEADER.size + min(len(payload), expected),
        )
    out = np.frombuffer(payload, dtype=dtype).reshape(rows, cols)
    return out.astype(out.dtype.newbyteorder("="))


def write_csv(path, matrix) -> None:
    """Write a real matrix as plain CSV (one row per line)."""
    np.savetxt(path, np.asarray(matrix, dtype=float), fmt="%.10g", delimiter=",")


def write_json(path, payload: dict) -> None:
    """Deterministic JSON dump (sorted keys, trailing newline)."""
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# ---------------------------------------------------------------------------
# WAV input
# ---------------------------------------------------------------------------


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file as mono float64 samples plus the sample rate.

    Integer samples are scaled to [-1, 1); multi-channel audio is
    averaged down to mono.  Unsupported encodings and structural
    problems raise :class:`WavFormatError` with the offending byte
    offset.
    """
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise WavFormatError("file too short for a RIFF header", offset=len(data))
    if data[0:4] != b"RIFF":
        raise WavFormatError(f"missing RIFF tag, found {data[0:4]!r}", offset=0)
    if data[8:12] != b"WAVE":
        raise WavFormatError(f"missing WAVE tag, found {data[8:12]!r}", offset=8)

    fmt = None
    fmt_offset = 0
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if body_start + size > len(data):
            raise WavFormatError(
                f"chunk {cid!r} of size {size} overruns the file", offset=pos
            )
        if cid == b"fmt ":
            if size < 16:
                raise WavFormatError(f"fmt chunk too short ({size} bytes)", offset=pos)
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
            fmt_offset = body_start
        elif cid == b"data":
            payload = data[body_start : body_start + size]
        pos = body_start + size + (size & 1)
    if fmt is None:
        raise WavFormatError("no fmt chunk found", offset=pos)
    if payload is None:
        raise WavFormatError("no data chunk found", offset=pos)

    audio_format, channels, rate, _, _, bits = fmt
    if channels < 1:
        raise WavFormatError("zero channels", offset=fmt_offset + 2)
    if (audio_format, bits) == (1, 16):
        raw = np.frombuffer(payload, dtype="<i2").astype(float) / 32768.0
    elif (audio_format, bits) == (1, 32):
        raw = np.frombuffer(payload, dtype="<i4").astype(float) / 2147483648.0
    elif (audio_format, bits) == (3, 32):
        raw = np.frombuffer(payload, dtype="<f4").astype(float)
    else:
        raise WavFormatError(
            f"unsupported encoding: format tag {audio_format}, {bits}-bit "
            "(PCM 16/32-bit int or 32-bit float only)",
            offset=fmt_offset,
        )
    if raw.size % channels:
        raise WavFormatError(
            f"data chunk holds {raw.size} samples, not divisible by {channels} channels",
            offset=fmt_offset,
        )
    samples = raw.reshape(-1, channels).mean(axis=1)
    return samples, int(rate)


def write_wav(path, samples, rate: int, encoding: str = "float32") -> None:
    """Write mono audio as a minimal PCM WAV (testing/demo helper)."""
    x = np.asarray(samples, dtype=float)
    if encoding == "float32":
        body = x.astype("<f4").tobytes()
        fmt = struct.pack("<HHIIHH", 3, 1, rate, rate * 4, 4, 32)
    elif encoding == "int16":
        quant = np.clip(np.round(x * 32767.0), -32768, 32767)
        body = quant.astype("<i2").tobytes()
        fmt = struct.pack("<HHIIHH", 1, 1, rate, rate * 2, 2, 16)
    else:
        raise ValueError(f"encoding must be 'float32' or 'int16', got {encoding!r}")
    chunks = (
        b"WAVE"
        + b"fmt "
        + struct.pack("<I", len(fmt))
        + fmt
        + b"data"
        + struct.pack("<I", len(body))
        + body
    )
    Path(path).write_bytes(b"RIFF" + struct.pack("<I", len(chunks)) + chunks)


# ---------------------------------------------------------------------------
# filter-bank serialization
# ---------------------------------------------------------------------------


def filterbank_hash(bank: FilterBank) -> str:
    """Short content hash of the sampled responses (for sidecars)."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(bank.filters_freq).tobytes())
    h.update(np.ascontiguousarray(bank.lowpass_freq).tobytes())
    return h.hexdigest()[:16]


def bank_metadata(bank: FilterBank) -> dict:
    """JSON-ready description of a bank (family, grid, parameters)."""
    params: dict[str, float | int] = {}
    if isinstance(bank.params, MorletParams):
        params["omega0"] = bank.params.omega0
    else:
        p = bank.params
        params.update(m=p.m, Q=p.Q, r=p.r, xi=p.xi, B=p.B, sigma_g=p.sigma_g)
    return {
        "family": bank.family,
        "J": bank.scale_set.J,
        "Q": bank.scale_set.Q,
        "params": params,
        "normalization": bank.normalization,
        "n_fft": bank.n_fft,
        "hash": filterbank_hash(bank),
    }


def save_filterbank(bank: FilterBank, stem) -> None:
    """Write ``<stem>.fcm`` (frequency responses) and ``<stem>.json``."""
    stem = Path(stem)
    write_matrix(stem.with_suffix(".fcm"), bank.filters_freq)
    write_json(stem.with_suffix(".json"), bank_metadata(bank))


def load_filterbank(stem) -> FilterBank:
    """Rebuild a bank from its sidecar and verify against the stored hash."""
    stem = Path(stem)
    meta = read_json(stem.with_suffix(".json"))
    if meta["family"] == "morlet":
        params = MorletParams(omega0=meta["params"]["omega0"])
    else:
        p = meta["params"]
        params = GammatoneParams(
            m=p["m"], Q=p["Q"], r=p["r"], xi=p["xi"], B=p["B"], sigma_g=p["sigma_g"]
        )
    bank = build_filterbank(
        make_scales(meta["J"], meta["Q"]), params, meta["n_fft"], meta["normalization"]
    )
    if filterbank_hash(bank) != meta["hash"]:
        raise FileFormatError(f"rebuilt bank does not match stored hash {meta['hash']}")
    stored = read_matrix(stem.with_suffix(".fcm"))
    if not np.array_equal(stored, bank.filters_freq):
        raise FileFormatError("stored responses differ from the rebuilt bank")
    return bank
