"""Audio ingestion and time-frequency analysis.

WAV decoding (PCM16 / IEEE float32), a 4th-order gammatone filterbank with
ERB-spaced channels producing per-frame band energies, and local energy-peak
detection on the log-compressed map.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import DecodeError, EmptyMap, UnsupportedFormat

LOG_EPS = 1e-10


@dataclass(frozen=True)
class AudioClip:
    """Mono waveform with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "samples",
                           np.asarray(self.samples, dtype=np.float64).reshape(-1))

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class TimeFrequencyMap:
    """frames x channels matrix of nonnegative band energies.

    `energy` holds raw (uncompressed) energies; `compressed()` applies the
    log(1 + E/eps) compression used for peak picking so weak peaks survive
    broadband noise.
    """

    energy: np.ndarray
    frame_hop: float
    frame_len: float
    center_freqs: np.ndarray
    sample_rate: int = 0

    def __post_init__(self):
        e = np.asarray(self.energy, dtype=np.float64)
        cf = np.asarray(self.center_freqs, dtype=np.float64)
        if e.ndim != 2:
            raise ValueError("energy must be frames x channels")
        if not np.isfinite(e).all() or (e < 0).any():
            raise ValueError("energies must be finite and nonnegative")
        if cf.ndim != 1 or len(cf) != e.shape[1] or np.any(np.diff(cf) <= 0):
            raise ValueError("center_freqs must be strictly increasing, one per channel")
        object.__setattr__(self, "energy", e)
        object.__setattr__(self, "center_freqs", cf)

    @property
    def frames(self) -> int:
        return self.energy.shape[0]

    @property
    def channels(self) -> int:
        return self.energy.shape[1]

    def compressed(self, eps: float = LOG_EPS) -> np.ndarray:
        return np.log1p(self.energy / eps)

    def to_json(self) -> str:
        return json.dumps({
            "version": 1,
            "frameHop": self.frame_hop,
            "frameLen": self.frame_len,
            "sampleRate": self.sample_rate,
            "centerFreqs": [float(f"{v:.9g}") for v in self.center_freqs],
            "energy": self.energy.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "TimeFrequencyMap":
        doc = json.loads(text)
        return cls(energy=np.asarray(doc["energy"], dtype=np.float64),
                   frame_hop=doc["frameHop"], frame_len=doc["frameLen"],
                   center_freqs=np.asarray(doc["centerFreqs"], dtype=np.float64),
                   sample_rate=doc.get("sampleRate", 0))


@dataclass(frozen=True, order=True)
class EnergyPeak:
    frame: int
    channel: int
    energy: float


# --- WAV ----------------------------------------------------------------------

_PCM = 1
_IEEE_FLOAT = 3
_EXTENSIBLE = 0xFFFE


def decode_wav(data: bytes) -> AudioClip:
    """Decode a RIFF/WAVE byte string (PCM 16-bit or IEEE float 32-bit).

    Multi-channel audio is averaged down to mono; samples end up in [-1, 1].
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise DecodeError("not a RIFF/WAVE stream")
    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if cid not in (b"fmt ", b"data"):
            pos += 8 + size + (size & 1)
            continue
        if len(body) < size:
            raise DecodeError(f"truncated {cid.decode('ascii', 'replace')} chunk")
        if cid == b"fmt ":
            if size < 16:
                raise DecodeError("fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == _EXTENSIBLE:
                if size < 26:
                    raise DecodeError("extensible fmt chunk too short")
                (sub,) = struct.unpack_from("<H", body, 24)
                fmt = (sub,) + fmt[1:]
        else:
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None:
        raise DecodeError("missing fmt chunk")
    if payload is None:
        raise DecodeError("missing data chunk")

    codec, channels, rate, _, _, bits = fmt
    if channels < 1 or rate <= 0:
        raise DecodeError("invalid channel count or sample rate")
    if codec == _PCM and bits == 16:
        usable = len(payload) - len(payload) % (2 * channels)
        raw = np.frombuffer(payload[:usable], dtype="<i2").astype(np.float64)
        samples = raw / 32768.0
    elif codec == _IEEE_FLOAT and bits == 32:
        usable = len(payload) - len(payload) % (4 * channels)
        samples = np.frombuffer(payload[:usable], dtype="<f4").astype(np.float64)
        samples = np.clip(samples, -1.0, 1.0)
    else:
        raise UnsupportedFormat(f"codec {codec}, {bits}-bit not supported")
    if channels > 1:
        samples = samples[:len(samples) - len(samples) % channels]
        samples = samples.reshape(-1, channels).mean(axis=1)
    return AudioClip(samples=samples, sample_rate=rate)


def read_wav(path) -> AudioClip:
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def write_wav(path, clip: AudioClip) -> None:
    """Write a clip as 16-bit PCM WAV (deterministic bytes)."""
    pcm = np.clip(np.round(clip.samples * 32767.0), -32768, 32767).astype("<i2")
    body = pcm.tobytes()
    with open(path, "wb") as fh:
        fh.write(b"RIFF")
        fh.write(struct.pack("<I", 36 + len(body)))
        fh.write(b"WAVEfmt ")
        fh.write(struct.pack("<IHHIIHH", 16, _PCM, 1, clip.sample_rate,
                             clip.sample_rate * 2, 2, 16))
        fh.write(b"data")
        fh.write(struct.pack("<I", len(body)))
        fh.write(body)


# --- gammatone filterbank ------------------------------------------------------

_ORDER = 4
# bandwidth correction for an order-4 gammatone: ERB = a_gamma * b
_A_GAMMA = math.pi * math.factorial(2 * _ORDER - 2) * 2.0 ** -(2 * _ORDER - 2) \
    / math.factorial(_ORDER - 1) ** 2


def erb_hz(freq: float) -> float:
    """Equivalent rectangular bandwidth at a frequency (Glasberg-Moore)."""
    return 24.7 * (4.37 * freq / 1000.0 + 1.0)


def erb_rate(freq):
    return 21.4 * np.log10(1.0 + 4.37 * np.asarray(freq, dtype=np.float64) / 1000.0)


def erb_rate_inverse(rate):
    return (10.0 ** (np.asarray(rate, dtype=np.float64) / 21.4) - 1.0) * 1000.0 / 4.37


def erb_space(f_low: float, f_high: float, n_channels: int) -> np.ndarray:
    """Center frequencies uniformly spaced on the ERB-rate scale, ascending."""
    rates = np.linspace(erb_rate(f_low), erb_rate(f_high), n_channels)
    return erb_rate_inverse(rates)


def gammatone_channel(samples: np.ndarray, cf: float, sample_rate: float) -> np.ndarray:
    """Band-pass the waveform with a 4th-order gammatone at cf.

    Implemented as a 4x cascaded complex one-pole resonator, peak-normalized
    so a tone at cf passes with unit envelope gain; returns the real band
    signal.
    """
    lam = math.exp(-2.0 * math.pi * (erb_hz(cf) / _A_GAMMA) / sample_rate)
    beta = 2.0 * math.pi * cf / sample_rate
    pole = lam * complex(math.cos(beta), math.sin(beta))
    y = samples.astype(np.complex128)
    for _ in range(_ORDER):
        y = lfilter([1.0], [1.0, -pole], y)
    return 2.0 * (1.0 - lam) ** _ORDER * y.real


def gammatonegram(clip: AudioClip, n_channels: int = 64, f_low: float = 80.0,
                  f_high: float = 8000.0, frame_len: float = 0.010,
                  frame_hop: float = 0.005) -> TimeFrequencyMap:
    """Gammatone filterbank energy map.

    Each channel's output is squared and averaged over sliding frames of
    `frame_len` seconds every `frame_hop` seconds, giving
    frames = floor((duration - frame_len)/frame_hop) + 1 rows.
    """
    sr = clip.sample_rate
    if not 0 < f_low < f_high <= sr / 2:
        raise ValueError("need 0 < f_low < f_high <= sample_rate/2")
    if n_channels < 2:
        raise ValueError("n_channels must be >= 2")
    wlen = int(round(frame_len * sr))
    hop = int(round(frame_hop * sr))
    if wlen < 1 or hop < 1:
        raise ValueError("frame_len and frame_hop too short for the sample rate")
    n = len(clip.samples)
    if n < wlen:
        raise EmptyMap(f"clip of {n} samples shorter than one {wlen}-sample frame")
    n_frames = (n - wlen) // hop + 1

    cfs = erb_space(f_low, f_high, n_channels)
    energy = np.empty((n_frames, n_channels), dtype=np.float64)
    for ci, cf in enumerate(cfs):
        band = gammatone_channel(clip.samples, cf, sr)
        sq = band * band
        windows = np.lib.stride_tricks.sliding_window_view(sq, wlen)[::hop]
        energy[:, ci] = windows[:n_frames].mean(axis=1)
    return TimeFrequencyMap(energy=energy, frame_hop=hop / sr, frame_len=wlen / sr,
                            center_freqs=cfs, sample_rate=sr)


# --- peak detection -------------------------------------------------------------


def detect_peaks(tf: TimeFrequencyMap, floor: float = 0.15,
                 min_dist: tuple[int, int] = (3, 2)) -> list[EnergyPeak]:
    """Local energy peaks of the log-compressed map.

    Strict maxima over the 8-neighbourhood with compressed energy >=
    floor * (compressed global max); peaks within the min_dist box of an
    already-retained higher peak are suppressed. Ties resolve to the earlier
    frame, then the lower channel. Returned sorted by descending energy;
    EnergyPeak.energy is the raw (uncompressed) map energy.
    """
    if not 0 < floor < 1:
        raise ValueError("floor must be in (0,1)")
    if min_dist[0] < 1 or min_dist[1] < 1:
        raise ValueError("min_dist must be >= (1,1)")
    grid = tf.compressed()
    gmax = grid.max()
    if gmax <= 0:
        return []
    thr = floor * gmax

    # strict 8-neighbourhood maxima via padded comparison
    pad = np.full((grid.shape[0] + 2, grid.shape[1] + 2), -np.inf)
    pad[1:-1, 1:-1] = grid
    core = pad[1:-1, 1:-1]
    is_max = core >= thr
    for dt in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dt == 0 and dc == 0:
                continue
            is_max &= core > pad[1 + dt:pad.shape[0] - 1 + dt, 1 + dc:pad.shape[1] - 1 + dc]
    ts, cs = np.nonzero(is_max)
    order = sorted(range(len(ts)), key=lambda i: (-grid[ts[i], cs[i]], ts[i], cs[i]))

    kept: list[EnergyPeak] = []
    kept_pos: list[tuple[int, int]] = []
    for i in order:
        t, c = int(ts[i]), int(cs[i])
        if all(abs(t - kt) >= min_dist[0] or abs(c - kc) >= min_dist[1]
               for kt, kc in kept_pos):
            kept_pos.append((t, c))
            kept.append(EnergyPeak(frame=t, channel=c, energy=float(tf.energy[t, c])))
    return kept
