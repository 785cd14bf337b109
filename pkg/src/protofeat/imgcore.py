"""Foundational 2D kernels: convolution, Gaussian / difference-of-Gaussians
filtering, bilinear interpolation, shifting and rotation.

Images are plain 2-D float64 numpy arrays in row-major order. Ingested images
live in [0, 1]; intermediate response maps only have to stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidKernel, ShapeError

ON_CENTER = "on-center"
OFF_CENTER = "off-center"

# spec name -> scipy.ndimage mode
_BORDER_MODES = {"reflect": "reflect", "replicate": "nearest", "zero": "constant"}


@dataclass(frozen=True)
class DoGParams:
    """Difference-of-Gaussians parameters.

    sigma is the outer (wide) standard deviation in pixels; the inner one is
    sigma_ratio * sigma. Polarity "on-center" keeps the wide-minus-narrow sign
    (negative centre, responds to dark blobs/lines); "off-center" negates it.
    """

    sigma: float
    sigma_ratio: float = 0.5
    polarity: str = OFF_CENTER

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if not 0 < self.sigma_ratio < 1:
            raise ValueError(f"sigma_ratio must be in (0,1), got {self.sigma_ratio}")
        if self.polarity not in (ON_CENTER, OFF_CENTER):
            raise ValueError(f"polarity must be {ON_CENTER!r} or {OFF_CENTER!r}")


def as_image(data, clamp: bool = False) -> np.ndarray:
    """Validate a 2-D finite float array; optionally clamp into [0, 1]."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"expected a 2-D image, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("image contains non-finite values")
    if clamp:
        arr = np.clip(arr, 0.0, 1.0)
    return np.ascontiguousarray(arr)


def convolve(img: np.ndarray, kernel: np.ndarray, border: str = "reflect") -> np.ndarray:
    """Filter `img` with an odd-sized kernel (sliding weighted sum).

    The impulse response is the point-mirrored kernel, i.e. this is the usual
    image-processing filter operation. Output has the same size as the input;
    borders are handled per `border` (reflect | replicate | zero).
    """
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] % 2 == 0 or kernel.shape[1] % 2 == 0:
        raise InvalidKernel(f"kernel must be odd-sized in both axes, got {kernel.shape}")
    if border not in _BORDER_MODES:
        raise ValueError(f"unknown border mode {border!r}")
    return ndimage.correlate(img, kernel, mode=_BORDER_MODES[border], cval=0.0)


def gaussian_kernel_1d(sigma: float, radius_factor: float = 3.0) -> np.ndarray:
    """Unit-sum 1-D Gaussian, truncated at ceil(radius_factor * sigma)."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    r = int(math.ceil(radius_factor * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def gaussian_kernel(sigma: float, radius_factor: float = 3.0) -> np.ndarray:
    """Unit-sum 2-D Gaussian kernel (outer product of the 1-D one)."""
    g = gaussian_kernel_1d(sigma, radius_factor)
    return np.outer(g, g)


def gaussian_blur(img: np.ndarray, sigma: float, radius_factor: float = 3.0,
                  border: str = "reflect") -> np.ndarray:
    """Separable Gaussian blur; matches convolve(img, gaussian_kernel(sigma)).

    sigma == 0 returns the input unchanged.
    """
    if sigma == 0:
        return np.asarray(img, dtype=np.float64).copy()
    g = gaussian_kernel_1d(sigma, radius_factor)
    mode = _BORDER_MODES[border]
    out = ndimage.correlate1d(np.asarray(img, dtype=np.float64), g, axis=0, mode=mode, cval=0.0)
    return ndimage.correlate1d(out, g, axis=1, mode=mode, cval=0.0)


def dog_kernel(p: DoGParams, radius_factor: float = 3.0) -> np.ndarray:
    """Difference-of-Gaussians kernel: wide minus narrow, each unit-sum.

    Both Gaussians are sampled on the support of the wide one, so the kernel
    sums to ~0 (|sum| < 1e-10). Off-center polarity negates the kernel, which
    makes the centre value positive (the narrow Gaussian dominates at the
    origin).
    """
    if radius_factor < 3.0:
        raise ValueError("radius_factor must be >= 3")
    r = int(math.ceil(radius_factor * p.sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    yy, xx = np.meshgrid(x, x, indexing="ij")
    d2 = xx * xx + yy * yy

    def unit_gauss(s):
        g = np.exp(-d2 / (2.0 * s * s))
        return g / g.sum()

    k = unit_gauss(p.sigma) - unit_gauss(p.sigma_ratio * p.sigma)
    if p.polarity == OFF_CENTER:
        k = -k
    return k


def dog_response(img: np.ndarray, p: DoGParams, radius_factor: float = 3.0,
                 border: str = "reflect") -> np.ndarray:
    """Half-wave rectified DoG filtering: max(0, img filtered with dog_kernel).

    Rectification happens here so downstream geometric means always see
    nonnegative factors.
    """
    resp = convolve(img, dog_kernel(p, radius_factor), border=border)
    return np.maximum(resp, 0.0)


def bilinear_sample(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Sample `img` at fractional (row, col) positions; out-of-bounds reads 0."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    ys = np.asarray(ys, dtype=np.float64)
    xs = np.asarray(xs, dtype=np.float64)

    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = ys - y0
    fx = xs - x0

    out = np.zeros(np.broadcast(ys, xs).shape, dtype=np.float64)
    for dy, dx, wgt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        yi = y0 + dy
        xi = x0 + dx
        ok = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        vals = np.zeros_like(out)
        vals[ok] = img[yi[ok], xi[ok]]
        out += wgt * vals
    return out


def shift_image(img: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Translate by (dx, dy) pixels: output(x, y) = img(x - dx, y - dy).

    Fractional shifts use bilinear interpolation; samples falling outside the
    image read 0. Integer shifts take an exact slicing fast path.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if dx == int(dx) and dy == int(dy):
        idx, idy = int(dx), int(dy)
        out = np.zeros_like(img)
        ys0, ys1 = max(0, idy), min(h, h + idy)
        xs0, xs1 = max(0, idx), min(w, w + idx)
        if ys0 < ys1 and xs0 < xs1:
            out[ys0:ys1, xs0:xs1] = img[ys0 - idy:ys1 - idy, xs0 - idx:xs1 - idx]
        return out
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    return bilinear_sample(img, yy - dy, xx - dx)


def rotate(img: np.ndarray, angle: float) -> np.ndarray:
    """Rotate about the image centre with bilinear interpolation; outside = 0.

    Positive angles rotate content in the direction of increasing polar angle
    in (x right, y down) coordinates.
    """
    img = np.asarray(img, dtype=np.float64)
    if angle == 0.0:
        return img.copy()
    h, w = img.shape
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    ca, sa = math.cos(angle), math.sin(angle)
    # inverse mapping: source = R(-angle) . (p - c) + c
    dx = xx - cx
    dy = yy - cy
    sx = ca * dx + sa * dy + cx
    sy = -sa * dx + ca * dy + cy
    return bilinear_sample(img, sy, sx)
