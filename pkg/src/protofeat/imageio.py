"""Image file ingestion and export.

Reads 8/16-bit grayscale and RGB images in PNG and PGM/PPM, scaled to [0, 1].
RGB collapses to grayscale via the green channel (default, the high-contrast
channel for fundus photography) or ITU-R BT.601 luma.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import DataError

GREEN = "green"
LUMA = "luma"

_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def load_image(path, channel: str = GREEN) -> np.ndarray:
    """Load an image file as a float64 grayscale array in [0, 1]."""
    if channel not in (GREEN, LUMA):
        raise ValueError(f"channel must be {GREEN!r} or {LUMA!r}")
    try:
        with Image.open(path) as im:
            im.load()
            arr = _to_float(im)
    except DataError:
        raise
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read image {path}: {exc}") from exc
    if arr.ndim == 3:
        if channel == GREEN:
            arr = arr[:, :, 1]
        else:
            arr = arr @ _LUMA_WEIGHTS
    return np.clip(arr, 0.0, 1.0)


def _to_float(im: Image.Image) -> np.ndarray:
    """Scale PIL pixel data to [0, 1] floats, keeping RGB planes if present."""
    mode = im.mode
    if mode in ("L", "P"):
        if mode == "P":
            im = im.convert("L")
        return np.asarray(im, dtype=np.float64) / 255.0
    if mode in ("I;16", "I;16B", "I;16L"):
        return np.asarray(im, dtype=np.float64) / 65535.0
    if mode == "I":
        arr = np.asarray(im, dtype=np.float64)
        # PGM/PNG 16-bit can surface as mode I; scale by the observed depth
        return arr / (65535.0 if arr.max() > 255 else 255.0)
    if mode in ("RGB", "RGBA"):
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
    if mode == "F":
        return np.asarray(im, dtype=np.float64)
    raise DataError(f"unsupported image mode {mode!r}")


def save_png(path, img: np.ndarray) -> None:
    """Write a [0, 1] grayscale array as 8-bit PNG."""
    data = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    Image.fromarray((data * 255.0 + 0.5).astype(np.uint8), mode="L").save(path, format="PNG")


def save_binary_png(path, mask: np.ndarray) -> None:
    """Write a boolean/binary array as 0/255 8-bit PNG."""
    data = (np.asarray(mask) > 0).astype(np.uint8) * 255
    Image.fromarray(data, mode="L").save(path, format="PNG")


def save_pgm(path, img: np.ndarray) -> None:
    """Write a [0, 1] grayscale array as binary 8-bit PGM (P5)."""
    data = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0)
    raw = (data * 255.0 + 0.5).astype(np.uint8)
    h, w = raw.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(raw.tobytes())


def heatmap_to_unit(arr: np.ndarray) -> np.ndarray:
    """Normalize an arbitrary nonnegative map into [0, 1] for export."""
    arr = np.asarray(arr, dtype=np.float64)
    top = arr.max()
    if top <= 0:
        return np.zeros_like(arr)
    return arr / top
