"""Seeded synthetic stimuli: bar images for filter configuration and tests,
and an on-disk audio event dataset with known ground truth.

All randomness flows from explicit seeds through numpy's default generator
(PCG64), so regenerating with the same seed is byte-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import audiofront


def bar_image(shape: tuple[int, int], thickness: float, angle: float = 0.0,
              center: tuple[float, float] | None = None, length: float | None = None,
              value: float = 1.0, background: float = 0.0) -> np.ndarray:
    """Render a straight bar with a 1-px anti-aliased edge.

    The bar runs through `center` ((x, y), default image centre) along
    direction `angle`; `length=None` spans the whole image. For a half-bar
    (line ending at the centre) pass length=inf with `half=True` via
    half_bar_image below.
    """
    return _bar(shape, thickness, angle, center, length, value, background, half=False)


def half_bar_image(shape: tuple[int, int], thickness: float, angle: float = 0.0,
                   center: tuple[float, float] | None = None, value: float = 1.0,
                   background: float = 0.0) -> np.ndarray:
    """Bar that terminates at `center` and extends in direction angle+pi."""
    return _bar(shape, thickness, angle, center, None, value, background, half=True)


def _bar(shape, thickness, angle, center, length, value, background, half):
    h, w = shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    cx, cy = center
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    ux, uy = math.cos(angle), math.sin(angle)
    dx = xx - cx
    dy = yy - cy
    along = dx * ux + dy * uy
    across = np.abs(-dx * uy + dy * ux)
    # coverage: 1 inside, linear 1-px ramp at the edge
    cov = np.clip(thickness / 2.0 + 0.5 - across, 0.0, 1.0)
    if half:
        cov = cov * np.clip(0.5 - along, 0.0, 1.0)
    elif length is not None:
        cov = cov * np.clip(length / 2.0 + 0.5 - np.abs(along), 0.0, 1.0)
    return background + (value - background) * cov


def bar_mask(shape: tuple[int, int], thickness: float, angle: float = 0.0,
             center: tuple[float, float] | None = None) -> np.ndarray:
    """Boolean ground-truth mask of the bar (hard edge, no ramp)."""
    h, w = shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    cx, cy = center
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    across = np.abs(-(xx - cx) * math.sin(angle) + (yy - cy) * math.cos(angle))
    return across <= thickness / 2.0


def centerline_mask(shape: tuple[int, int], angle: float = 0.0,
                    center: tuple[float, float] | None = None) -> np.ndarray:
    """Pixels within half a pixel of the bar's central line."""
    h, w = shape
    if center is None:
        center = ((w - 1) / 2.0, (h - 1) / 2.0)
    cx, cy = center
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    across = np.abs(-(xx - cx) * math.sin(angle) + (yy - cy) * math.cos(angle))
    return across <= 0.5


# --- synthetic audio event dataset ------------------------------------------


@dataclass(frozen=True)
class SynthAudioConfig:
    n_classes: int = 3
    n_per_class: int = 10
    snr_levels: tuple[float, ...] = (5.0, 0.0, -5.0)
    seed: int = 0
    sample_rate: int = 16000
    clip_seconds: float = 3.0
    event_seconds: float = 0.8

    def __post_init__(self):
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        if self.n_per_class < 1:
            raise ValueError("n_per_class must be >= 1")
        if not self.snr_levels:
            raise ValueError("need at least one SNR level")


def class_template(class_index: int, n_samples: int, sample_rate: int) -> np.ndarray:
    """Deterministic waveform template for a class: chirps and harmonic
    stacks with class-dependent frequency layout, Hann-windowed."""
    t = np.arange(n_samples, dtype=np.float64) / sample_rate
    dur = n_samples / sample_rate
    kind = class_index % 3
    octave = class_index // 3  # shift families upward for classes beyond 3
    base = 400.0 * (1.5 ** octave)
    if kind == 0:  # rising chirp
        f0, f1 = base, base * 4.0
        phase = 2 * np.pi * (f0 * t + (f1 - f0) * t * t / (2 * dur))
        sig = np.sin(phase)
    elif kind == 1:  # falling chirp
        f0, f1 = base * 4.0, base
        phase = 2 * np.pi * (f0 * t + (f1 - f0) * t * t / (2 * dur))
        sig = np.sin(phase)
    else:  # pulsed harmonic stack
        f0 = base * 1.25
        sig = np.zeros_like(t)
        for k in range(1, 5):
            sig += np.sin(2 * np.pi * k * f0 * t) / k
        pulses = 0.5 * (1.0 - np.cos(2 * np.pi * 3.0 * t / dur))  # 3 bursts
        sig *= pulses
    window = np.hanning(n_samples)
    return sig * window


def mix_at_snr(signal: np.ndarray, noise_segment: np.ndarray, snr_db: float) -> tuple[np.ndarray, float]:
    """Scale `signal` onto `noise_segment` so the mixed segment has exactly
    the requested SNR = 10*log10(P_signal / P_noise) over the segment.

    Returns (scaled signal, gain applied).
    """
    p_sig = float(np.mean(signal ** 2))
    p_noise = float(np.mean(noise_segment ** 2))
    if p_sig <= 0 or p_noise <= 0:
        raise ValueError("both signal and noise must carry power")
    gain = math.sqrt(p_noise * 10.0 ** (snr_db / 10.0) / p_sig)
    return signal * gain, gain


def synth_audio_dataset(out_dir, config: SynthAudioConfig) -> Path:
    """Write the seeded dataset: one WAV clip per event, clean per-class
    prototypes, and ground_truth.csv (file,start,end,label).

    Layout:
        out_dir/audio/<label>_<idx>_snr<level>.wav
        out_dir/prototypes/<label>.wav
        out_dir/ground_truth.csv
    """
    out = Path(out_dir)
    (out / "audio").mkdir(parents=True, exist_ok=True)
    (out / "prototypes").mkdir(parents=True, exist_ok=True)

    sr = config.sample_rate
    n_clip = int(round(config.clip_seconds * sr))
    n_event = int(round(config.event_seconds * sr))
    rows = []

    for ci in range(config.n_classes):
        label = f"class{ci}"
        template = class_template(ci, n_event, sr)
        proto = audiofront.AudioClip(samples=0.5 * template, sample_rate=sr)
        audiofront.write_wav(out / "prototypes" / f"{label}.wav", proto)

        for ei in range(config.n_per_class):
            for snr in config.snr_levels:
                rng = np.random.default_rng(
                    (config.seed, ci, ei, int(round(snr * 100))))
                noise = 0.05 * rng.standard_normal(n_clip)
                start = int(rng.integers(int(0.3 * sr), n_clip - n_event - int(0.3 * sr)))
                scaled, _ = mix_at_snr(template, noise[start:start + n_event], snr)
                clip = noise.copy()
                clip[start:start + n_event] += scaled
                peak = np.abs(clip).max()
                if peak > 0.99:  # avoid PCM clipping distortion of the mix
                    clip *= 0.99 / peak
                snr_tag = f"{snr:+.0f}".replace("+", "p").replace("-", "m")
                name = f"{label}_{ei:03d}_snr{snr_tag}.wav"
                audiofront.write_wav(out / "audio" / name,
                                     audiofront.AudioClip(clip, sr))
                rows.append((f"audio/{name}", start / sr,
                             (start + n_event) / sr, label))

    with open(out / "ground_truth.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file", "start", "end", "label"])
        for file, start, end, label in rows:
            writer.writerow([file, f"{start:.6f}", f"{end:.6f}", label])
    return out
