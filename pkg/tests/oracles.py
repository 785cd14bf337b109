"""Independent brute-force oracles used to pin expected values.

Everything here is written from the operation definitions with plain loops,
deliberately not sharing code with the package implementations.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _border_index(i: int, n: int, border: str) -> int | None:
    """Resolve an out-of-range index per border mode; None means 'reads 0'."""
    if 0 <= i < n:
        return i
    if border == "zero":
        return None
    if border == "replicate":
        return min(max(i, 0), n - 1)
    if border == "reflect":
        # abcd -> dcba|abcd|dcba (half-sample symmetric)
        while not 0 <= i < n:
            if i < 0:
                i = -i - 1
            else:
                i = 2 * n - 1 - i
        return i
    raise ValueError(border)


def conv_oracle(img: np.ndarray, kernel: np.ndarray, border: str = "reflect") -> np.ndarray:
    """Sliding weighted sum, straight from the definition."""
    img = np.asarray(img, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros_like(img)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for dy in range(-ry, ry + 1):
                for dx in range(-rx, rx + 1):
                    yi = _border_index(y + dy, h, border)
                    xi = _border_index(x + dx, w, border)
                    if yi is None or xi is None:
                        continue
                    acc += kernel[ry + dy, rx + dx] * img[yi, xi]
            out[y, x] = acc
    return out


def exhaustive_peaks(grid: np.ndarray, floor: float, min_dist: tuple[int, int]):
    """Peak picking by exhaustive scan: strict 8-neighbourhood maxima above
    floor * global max, then greedy suppression within the min_dist box.

    Returns (frame, channel, value) triples sorted by descending value with
    earlier-frame / lower-channel tie-breaking, same contract as the library.
    """
    grid = np.asarray(grid, dtype=np.float64)
    nt, nc = grid.shape
    gmax = grid.max()
    if gmax <= 0:
        return []
    thr = floor * gmax
    cands = []
    for t in range(nt):
        for c in range(nc):
            v = grid[t, c]
            if v < thr:
                continue
            strict = True
            for dt in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dt == 0 and dc == 0:
                        continue
                    ti, ci = t + dt, c + dc
                    if 0 <= ti < nt and 0 <= ci < nc and grid[ti, ci] >= v:
                        strict = False
            if strict:
                cands.append((t, c, v))
    cands.sort(key=lambda p: (-p[2], p[0], p[1]))
    kept = []
    for t, c, v in cands:
        if all(abs(t - kt) >= min_dist[0] or abs(c - kc) >= min_dist[1]
               for kt, kc, _ in kept):
            kept.append((t, c, v))
    return kept


def interval_iou(a, b) -> float:
    inter = max(0.0, min(a[1], b[1]) - max(a[0], b[0]))
    union = max(a[1], b[1]) - min(a[0], b[0])
    return inter / union if union > 0 else 0.0


def exhaustive_match(pred, gt):
    """Greedy max-IoU matching found by repeated exhaustive scans over all
    remaining (pred, gt) pairs rather than by sorting.

    pred/gt are sequences of (start, end, label) triples. Returns a list of
    (pred_idx, gt_idx, iou) with iou > 0.
    """
    free_p = set(range(len(pred)))
    free_g = set(range(len(gt)))
    matches = []
    while free_p and free_g:
        best = None
        for pi in sorted(free_p):
            for gi in sorted(free_g):
                iou = interval_iou(pred[pi][:2], gt[gi][:2])
                if iou <= 0:
                    continue
                key = (-iou, gi, pi)
                if best is None or key < best[0]:
                    best = (key, pi, gi, iou)
        if best is None:
            break
        _, pi, gi, iou = best
        matches.append((pi, gi, iou))
        free_p.remove(pi)
        free_g.remove(gi)
    return matches


def brute_force_subsets(X: np.ndarray, y, eval_fn, max_size: int):
    """Best feature subset of size <= max_size by full enumeration.

    Ties broken by smaller size, then lexicographic index order.
    """
    n_feat = X.shape[1]
    best = None
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(range(n_feat), size):
            acc = eval_fn(X[:, combo], y)
            key = (-acc, size, combo)
            if best is None or key < best[0]:
                best = (key, combo, acc)
    return best[1], best[2]


def nearest_centroid_accuracy(X_train, y_train, X_test, y_test) -> float:
    labels = sorted(set(y_train))
    cents = {lab: X_train[np.asarray(y_train) == lab].mean(axis=0) for lab in labels}
    correct = 0
    for x, t in zip(X_test, y_test):
        pred = min(labels, key=lambda lab: float(np.sum((x - cents[lab]) ** 2)))
        correct += pred == t
    return correct / len(y_test)


def gammatone_channel_gain(cf: float, tone_freq: float, sample_rate: float) -> float:
    """Analytic magnitude gain of the 4th-order one-pole-cascade gammatone
    channel at a given tone frequency, peak-normalized at cf."""
    erb = 24.7 * (4.37 * cf / 1000.0 + 1.0)
    a_gamma = math.pi * math.factorial(6) * 2.0 ** -6 / math.factorial(3) ** 2
    lam = math.exp(-2.0 * math.pi * (erb / a_gamma) / sample_rate)
    beta = 2.0 * math.pi * cf / sample_rate
    omega = 2.0 * math.pi * tone_freq / sample_rate
    one_stage = abs(1.0 - lam * complex(math.cos(beta - omega), math.sin(beta - omega)))
    return (1.0 - lam) ** 4 / one_stage ** 4


def entropy_bits(counts) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    p = counts / counts.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())
