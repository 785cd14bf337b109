"""Bar-selective trainable filters.

A filter is configured from a single prototype image: the prototype's
rectified DoG response is scanned along circles around a chosen centre, and
local maxima become (sigma, rho, phi) tuples. Applying the filter computes
the weighted geometric mean of blurred DoG responses, each shifted so its
tuple's offset lands on the filter centre. Rotation invariance re-shifts the
same blurred responses per orientation and takes the pixel-wise maximum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import NoStructureFound, ShapeError
from .imgcore import (DoGParams, bilinear_sample, dog_response, gaussian_blur,
                      shift_image)

LINE = "line"
LINE_ENDING = "line-ending"

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CosfireTuple:
    """One constituent DoG observation: scale sigma at polar offset (rho, phi)."""

    sigma: float
    rho: float
    phi: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if self.rho < 0:
            raise ValueError("rho must be >= 0")
        phi = 0.0 if self.rho == 0 else self.phi % TWO_PI
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class CosfireFilter:
    tuples: tuple[CosfireTuple, ...]
    kind: str
    dog: DoGParams
    sigma0: float = 3.0
    alpha: float = 0.7
    sigma_hat_factor: float = 1.0 / 3.0
    config_center: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tuples", tuple(self.tuples))
        if not self.tuples:
            raise ValueError("filter needs at least one tuple")
        if self.kind not in (LINE, LINE_ENDING):
            raise ValueError(f"kind must be {LINE!r} or {LINE_ENDING!r}")
        if self.sigma0 < 0 or self.alpha < 0:
            raise ValueError("sigma0 and alpha must be >= 0")

    @property
    def max_rho(self) -> float:
        return max(t.rho for t in self.tuples)

    def weights(self) -> np.ndarray:
        """Tuple weights exp(-rho^2 / (2 sigma_hat^2)); all 1 when max_rho = 0."""
        rhos = np.array([t.rho for t in self.tuples])
        if self.max_rho == 0:
            return np.ones_like(rhos)
        sigma_hat = self.sigma_hat_factor * self.max_rho
        return np.exp(-(rhos ** 2) / (2.0 * sigma_hat ** 2))


def _circle_samples(rho: float) -> np.ndarray:
    """Scan angles for a circle of radius rho, step <= 1/max(rho, 1) rad."""
    n = int(math.ceil(TWO_PI * max(rho, 1.0)))
    return np.arange(n) * (TWO_PI / n)


def _plateau_maxima(vals: np.ndarray) -> list[int]:
    """Indices of circular local maxima; runs of equal values count once,
    represented by their smallest index (smallest phi)."""
    n = len(vals)
    start = next((i for i in range(n) if vals[i] != vals[i - 1]), None)
    if start is None:  # constant circle
        return []
    idx = [(start + k) % n for k in range(n)]
    maxima = []
    k = 0
    while k < n:
        j = k
        while j + 1 < n and vals[idx[j + 1]] == vals[idx[k]]:
            j += 1
        prev_val = vals[idx[k - 1]]
        next_val = vals[idx[(j + 1) % n]]
        if vals[idx[k]] > prev_val and vals[idx[k]] > next_val:
            maxima.append(min(idx[k:j + 1]))
        k = j + 1
    return sorted(maxima)


def configure(prototype: np.ndarray, center: tuple[float, float], radii,
              dog: DoGParams, fraction: float = 0.5, *, kind: str = LINE,
              sigma0: float = 3.0, alpha: float = 0.7,
              sigma_hat_factor: float = 1.0 / 3.0,
              radius_factor: float = 3.0, border: str = "reflect") -> CosfireFilter:
    """Configure a filter from a single prototype image.

    For every radius rho the prototype's rectified DoG response is sampled on
    the circle of that radius about `center`; local maxima reaching
    `fraction` of the circle's maximum become tuples (dog.sigma, rho, phi).
    rho = 0 contributes a centre tuple when the centre response reaches
    `fraction` of the global maximum.

    Raises NoStructureFound when no scanned position responds at all.
    """
    prototype = np.asarray(prototype, dtype=np.float64)
    h, w = prototype.shape
    cx, cy = center
    if not (0 <= cx < w and 0 <= cy < h):
        raise ValueError(f"center {center} outside {w}x{h} image")
    radii = list(radii)
    if not radii or any(r < 0 for r in radii) or sorted(radii) != radii:
        raise ValueError("radii must be non-empty, nonnegative, ascending")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")

    resp = dog_response(prototype, dog, radius_factor=radius_factor, border=border)
    global_max = resp.max()
    if global_max <= 0:
        raise NoStructureFound("prototype has no positive DoG response")

    tuples: list[CosfireTuple] = []
    any_response = False
    for rho in radii:
        if rho == 0:
            center_val = float(bilinear_sample(resp, np.array(cy), np.array(cx)))
            if center_val > 0:
                any_response = True
                if center_val >= fraction * global_max:
                    tuples.append(CosfireTuple(dog.sigma, 0.0, 0.0))
            continue
        phis = _circle_samples(rho)
        vals = bilinear_sample(resp, cy + rho * np.sin(phis), cx + rho * np.cos(phis))
        circle_max = vals.max()
        if circle_max <= 0:
            continue
        any_response = True
        thr = fraction * circle_max
        for i in _plateau_maxima(vals):
            if vals[i] >= thr and vals[i] > 0:
                tuples.append(CosfireTuple(dog.sigma, float(rho), float(phis[i])))

    if not any_response:
        raise NoStructureFound("no scanned position has a positive response")
    if not tuples:
        raise NoStructureFound("responses too weak or unstructured to form tuples")
    return CosfireFilter(tuples=tuple(tuples), kind=kind, dog=dog, sigma0=sigma0,
                         alpha=alpha, sigma_hat_factor=sigma_hat_factor,
                         config_center=(float(cx), float(cy)))


# --- response computation -------------------------------------------------------


def _blurred_maps(img: np.ndarray, f: CosfireFilter, radius_factor: float,
                  border: str) -> dict[tuple[float, float], np.ndarray]:
    """Blurred rectified DoG responses, one per unique (sigma, rho) pair.

    Computed once per image; orientation sweeps only re-shift these maps.
    """
    dog_maps: dict[float, np.ndarray] = {}
    blurred: dict[tuple[float, float], np.ndarray] = {}
    for t in f.tuples:
        if t.sigma not in dog_maps:
            params = DoGParams(sigma=t.sigma, sigma_ratio=f.dog.sigma_ratio,
                               polarity=f.dog.polarity)
            dog_maps[t.sigma] = dog_response(img, params, radius_factor=radius_factor,
                                             border=border)
        key = (t.sigma, t.rho)
        if key not in blurred:
            blurred[key] = gaussian_blur(dog_maps[t.sigma], f.sigma0 + f.alpha * t.rho,
                                         radius_factor=radius_factor, border=border)
    return blurred


def _geomean_at_orientation(blurred, f: CosfireFilter, psi: float,
                            weights: np.ndarray) -> np.ndarray:
    """Weighted geometric mean of the blurred maps shifted for one
    orientation offset psi; zero wherever any factor is zero."""
    shape = next(iter(blurred.values())).shape
    log_acc = np.zeros(shape)
    positive = np.ones(shape, dtype=bool)
    for t, w in zip(f.tuples, weights):
        s = shift_image(blurred[(t.sigma, t.rho)],
                        -t.rho * math.cos(t.phi + psi),
                        -t.rho * math.sin(t.phi + psi))
        positive &= s > 0
        log_acc += w * np.log(np.where(s > 0, s, 1.0))
    out = np.zeros(shape)
    out[positive] = np.exp(log_acc[positive] / weights.sum())
    return out


def _respond_orientations(img: np.ndarray, f: CosfireFilter, psis,
                          radius_factor: float, border: str) -> np.ndarray:
    img = np.asarray(img, dtype=np.float64)
    if min(img.shape) <= f.max_rho:
        raise ShapeError(f"image {img.shape} not larger than max tuple shift "
                         f"{f.max_rho}")
    blurred = _blurred_maps(img, f, radius_factor, border)
    weights = f.weights()
    out = None
    for psi in psis:
        resp = _geomean_at_orientation(blurred, f, psi, weights)
        out = resp if out is None else np.maximum(out, resp)
    return out


def respond(img: np.ndarray, f: CosfireFilter, *, radius_factor: float = 3.0,
            border: str = "reflect") -> np.ndarray:
    """Filter response: weighted geometric mean of blurred, shifted DoG
    responses, one factor per tuple. Zero wherever any factor is zero."""
    return _respond_orientations(img, f, [0.0], radius_factor, border)


def respond_rotation_invariant(img: np.ndarray, f: CosfireFilter,
                               n_orientations: int = 12, *,
                               radius_factor: float = 3.0,
                               border: str = "reflect") -> np.ndarray:
    """Pixel-wise maximum of the response over rotated tuple sets.

    Orientations sweep pi for line filters (a line is symmetric under a half
    turn) and 2*pi for line-ending filters. The underlying blurred DoG maps
    are computed once and only re-shifted per orientation.
    """
    if n_orientations < 1:
        raise ValueError("n_orientations must be >= 1")
    span = math.pi if f.kind == LINE else TWO_PI
    psis = [k * span / n_orientations for k in range(n_orientations)]
    return _respond_orientations(img, f, psis, radius_factor, border)


# --- filter banks ---------------------------------------------------------------


def make_bank(dog_sigmas, radii_sets, kinds, *, sigma_ratio: float = 0.5,
              polarity: str = "off-center", fraction: float = 0.5,
              sigma0: float = 3.0, alpha: float = 0.7,
              sigma_hat_factor: float = 1.0 / 3.0) -> list[CosfireFilter]:
    """Configure the Cartesian product of (sigma, radii set, kind) filters on
    synthetic straight bars of thickness 2*sigma.

    Line filters use a full bar through the centre; line-ending filters use a
    half-bar terminating at the centre. Bar contrast matches the polarity:
    off-center (positive kernel centre) sees a bright bar on dark background,
    on-center the opposite.
    """
    from .synth import bar_image, half_bar_image  # local import to avoid cycle

    dog_sigmas = list(dog_sigmas)
    radii_sets = [list(r) for r in radii_sets]
    kinds = list(kinds)
    if not dog_sigmas or not radii_sets or not kinds:
        raise ValueError("dog_sigmas, radii_sets and kinds must be non-empty")

    bank = []
    for sigma in dog_sigmas:
        for radii in radii_sets:
            size = max(64, 2 * int(math.ceil(max(radii) + 8.0 * sigma)) + 1)
            if size % 2 == 0:
                size += 1
            center = ((size - 1) / 2.0, (size - 1) / 2.0)
            value, background = (1.0, 0.0) if polarity == "off-center" else (0.0, 1.0)
            for kind in kinds:
                maker = bar_image if kind == LINE else half_bar_image
                proto = maker((size, size), thickness=2.0 * sigma, angle=0.0,
                              value=value, background=background)
                dog = DoGParams(sigma=sigma, sigma_ratio=sigma_ratio, polarity=polarity)
                bank.append(configure(proto, center, radii, dog, fraction,
                                      kind=kind, sigma0=sigma0, alpha=alpha,
                                      sigma_hat_factor=sigma_hat_factor))
    return bank


# --- segmentation ---------------------------------------------------------------


@dataclass(frozen=True)
class SegmentationParams:
    """Binarization stage ahead of pixel metrics.

    threshold_fraction picks the cut as a fraction of the maximum summed
    response (inside the field-of-view mask when one is given). invert flips
    intensities so dark vessels become bright ridges. fov_pad grows the image
    content outward across the mask border to suppress rim artefacts;
    fov_erode shrinks the valid region before thresholding and zeroing.
    """

    threshold_fraction: float = 0.37
    invert: bool = True
    fov_pad: int = 0
    fov_erode: int = 0
    n_orientations: int = 12
    combine: str = "sum"

    def __post_init__(self):
        if not 0 <= self.threshold_fraction <= 1:
            raise ValueError("threshold_fraction must be in [0,1]")
        if self.combine not in ("sum", "max"):
            raise ValueError("combine must be 'sum' or 'max'")


def _pad_fov(img: np.ndarray, mask: np.ndarray, iterations: int) -> np.ndarray:
    """Grow image content outward across the mask border: each pass fills the
    one-pixel ring outside the mask with the mean of its masked neighbours."""
    work = img.copy()
    m = mask > 0
    ones = np.ones((3, 3))
    for _ in range(iterations):
        ring = ndimage.binary_dilation(m) & ~m
        if not ring.any():
            break
        sums = ndimage.correlate(np.where(m, work, 0.0), ones, mode="constant")
        counts = ndimage.correlate(m.astype(np.float64), ones, mode="constant")
        fill = np.where(counts > 0, sums / np.maximum(counts, 1.0), 0.0)
        work[ring] = fill[ring]
        m |= ring
    return work


def segment(img: np.ndarray, filters, params: SegmentationParams | None = None,
            fov_mask: np.ndarray | None = None, *, radius_factor: float = 3.0,
            border: str = "reflect") -> np.ndarray:
    """Binary delineation map from a bank of filters.

    Preprocesses (invert, optional field-of-view padding), combines
    rotation-invariant responses across the bank (sum by default), thresholds
    at threshold_fraction of the maximum and zeroes pixels outside the mask.
    """
    if params is None:
        params = SegmentationParams()
    filters = list(filters)
    if not filters:
        raise ValueError("need at least one filter")
    img = np.asarray(img, dtype=np.float64)
    work = 1.0 - img if params.invert else img
    valid = None
    if fov_mask is not None:
        fov_mask = np.asarray(fov_mask)
        if fov_mask.shape != img.shape:
            raise ShapeError("fov mask shape differs from image")
        if params.fov_pad > 0:
            work = _pad_fov(work, fov_mask, params.fov_pad)
        valid = fov_mask > 0
        if params.fov_erode > 0:
            valid = ndimage.binary_erosion(valid, iterations=params.fov_erode)

    response = None
    for f in filters:
        r = respond_rotation_invariant(work, f, params.n_orientations,
                                       radius_factor=radius_factor, border=border)
        if response is None:
            response = r
        elif params.combine == "sum":
            response = response + r
        else:
            response = np.maximum(response, r)

    scope = response[valid] if valid is not None else response
    top = scope.max() if scope.size else 0.0
    binary = response > params.threshold_fraction * top
    if valid is not None:
        binary &= valid
    return binary


# --- serialization ---------------------------------------------------------------


def filter_to_dict(f: CosfireFilter) -> dict:
    return {
        "kind": f.kind,
        "polarity": f.dog.polarity,
        "dog": {"sigma": f.dog.sigma, "sigmaRatio": f.dog.sigma_ratio},
        "tuples": [{"sigma": t.sigma, "rho": t.rho, "phi": float(f"{t.phi:.9g}")}
                   for t in f.tuples],
        "sigma0": f.sigma0,
        "alpha": f.alpha,
        "sigmaHatFactor": f.sigma_hat_factor,
    }


def filter_from_dict(doc: dict) -> CosfireFilter:
    dog = DoGParams(sigma=doc["dog"]["sigma"], sigma_ratio=doc["dog"]["sigmaRatio"],
                    polarity=doc["polarity"])
    tuples = tuple(CosfireTuple(t["sigma"], t["rho"], t["phi"]) for t in doc["tuples"])
    return CosfireFilter(tuples=tuples, kind=doc["kind"], dog=dog,
                         sigma0=doc["sigma0"], alpha=doc["alpha"],
                         sigma_hat_factor=doc["sigmaHatFactor"])


def save_filters(path, filters) -> None:
    doc = {"version": 1, "filters": [filter_to_dict(f) for f in filters]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_filters(path) -> list[CosfireFilter]:
    with open(path) as fh:
        doc = json.load(fh)
    if isinstance(doc, list):
        return [filter_from_dict(d) for d in doc]
    if "filters" in doc:
        return [filter_from_dict(d) for d in doc["filters"]]
    return [filter_from_dict(doc)]
