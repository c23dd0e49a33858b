#!/usr/bin/env python3
"""Reference implementations of the structure measure and the weighted
F-measure, plus the deterministic fixtures shared with the C++ selftest.

Run this script to regenerate the golden values embedded in
src/selftest.cpp. It is intentionally independent of the C++ code: plain
numpy, brute-force distance transform, no shared helpers.

Conventions (mirrored by the C++ implementation):
  - sample standard deviation (ddof=1; 0 for a single element) in the
    object score,
  - centroid from 1-based coordinates, rounded half up,
  - region SSIM variances normalized by N - 1 + eps,
  - eps = 2**-52,
  - nearest-foreground ties resolved to the smallest (row, col),
  - 7x7 Gaussian (sigma 5), zero-padded correlation,
  - F = (1 + b2) * P * R / (eps + b2 * P + R).
"""

import numpy as np

EPS = 2.220446049250313e-16
MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK64

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64


def fixture_speckle(n=32):
    rng_p = SplitMix64(0x5EEDF00D)
    rng_g = SplitMix64(0xBADC0FFE)
    pred = np.zeros((n, n), dtype=np.float64)
    gt = np.zeros((n, n), dtype=np.float64)
    for r in range(n):
        for c in range(n):
            pred[r, c] = np.float64(np.float32(np.float64(rng_p.next() % 256) / 255.0))
    for r in range(n):
        for c in range(n):
            gt[r, c] = float(rng_g.next() % 2)
    return pred, gt


def fixture_blob(n=32):
    gt = np.zeros((n, n), dtype=np.float64)
    for r in range(n):
        for c in range(n):
            in_rect = 8 <= r < 20 and 6 <= c < 16
            in_disk = (r - 22) ** 2 + (c - 22) ** 2 <= 36
            gt[r, c] = 1.0 if (in_rect or in_disk) else 0.0
    rng = SplitMix64(0xFEEDBEEF)
    pred = np.zeros((n, n), dtype=np.float64)
    for r in range(n):
        for c in range(n):
            base = 180 if gt[r, c] > 0 else 30
            v = base + rng.next() % 56
            pred[r, c] = np.float64(np.float32(np.float64(v) / 255.0))
    return pred, gt


def fixture_inverse():
    _, gt = fixture_blob()
    return 1.0 - gt, gt


def object_score(values):
    if values.size == 0:
        return 0.0
    x = values.mean()
    sigma = values.std(ddof=1) if values.size > 1 else 0.0
    return 2.0 * x / (x * x + 1.0 + sigma + EPS)


def region_ssim(pred, gt):
    n = pred.size
    if n == 0:
        return 0.0
    x = pred.mean()
    y = gt.mean()
    denom = n - 1 + EPS
    sxx = ((pred - x) ** 2).sum() / denom
    syy = ((gt - y) ** 2).sum() / denom
    sxy = ((pred - x) * (gt - y)).sum() / denom
    a = 4.0 * x * y * sxy
    b = (x * x + y * y) * (sxx + syy)
    if a != 0.0:
        return a / (b + EPS)
    if b == 0.0:
        return 1.0
    return 0.0


def s_measure(pred, gt, alpha=0.5):
    mu = gt.mean()
    if mu == 0.0:
        return 1.0 - pred.mean()
    if mu == 1.0:
        return pred.mean()

    fg = pred[gt > 0]
    bg = 1.0 - pred[gt == 0]
    s_o = mu * object_score(fg) + (1.0 - mu) * object_score(bg)

    h, w = gt.shape
    total = gt.sum()
    rows = np.arange(1, h + 1, dtype=np.float64)
    cols = np.arange(1, w + 1, dtype=np.float64)
    cy = int(np.floor(gt.sum(axis=1) @ rows / total + 0.5))
    cx = int(np.floor(gt.sum(axis=0) @ cols / total + 0.5))

    area = float(h * w)
    w1 = (cx * cy) / area
    w2 = ((w - cx) * cy) / area
    w3 = (cx * (h - cy)) / area
    w4 = 1.0 - w1 - w2 - w3
    q1 = region_ssim(pred[:cy, :cx], gt[:cy, :cx])
    q2 = region_ssim(pred[:cy, cx:], gt[:cy, cx:])
    q3 = region_ssim(pred[cy:, :cx], gt[cy:, :cx])
    q4 = region_ssim(pred[cy:, cx:], gt[cy:, cx:])
    s_r = w1 * q1 + w2 * q2 + w3 * q3 + w4 * q4

    s = alpha * s_o + (1.0 - alpha) * s_r
    return max(s, 0.0)


def nearest_foreground(gt):
    """Brute force: per background pixel, the closest foreground pixel with
    ties resolved to the smallest (row, col)."""
    h, w = gt.shape
    fg = [(r, c) for r in range(h) for c in range(w) if gt[r, c] > 0]
    dist = np.zeros((h, w), dtype=np.float64)
    nearest = np.full((h, w, 2), -1, dtype=np.int64)
    for r in range(h):
        for c in range(w):
            if gt[r, c] > 0:
                continue
            best = None
            best_d2 = None
            for (fr, fc) in fg:  # row-major order = lexicographic tie-break
                d2 = (r - fr) ** 2 + (c - fc) ** 2
                if best_d2 is None or d2 < best_d2:
                    best_d2 = d2
                    best = (fr, fc)
            dist[r, c] = np.sqrt(float(best_d2))
            nearest[r, c] = best
    return dist, nearest


def gaussian_kernel7():
    k = np.zeros((7, 7), dtype=np.float64)
    for dy in range(-3, 4):
        for dx in range(-3, 4):
            k[dy + 3, dx + 3] = np.exp(-(dy * dy + dx * dx) / 50.0)
    return k / k.sum()


def smooth(src):
    h, w = src.shape
    k = gaussian_kernel7()
    out = np.zeros_like(src)
    for r in range(h):
        for c in range(w):
            acc = 0.0
            for dy in range(-3, 4):
                rr = r + dy
                if rr < 0 or rr >= h:
                    continue
                for dx in range(-3, 4):
                    cc = c + dx
                    if cc < 0 or cc >= w:
                        continue
                    acc += src[rr, cc] * k[dy + 3, dx + 3]
            out[r, c] = acc
    return out


def weighted_f(pred, gt, beta2=0.3):
    n_fg = int(gt.sum())
    if n_fg == 0:
        return 0.0
    err = np.abs(pred - gt)
    dist, nearest = nearest_foreground(gt)

    err_t = err.copy()
    h, w = gt.shape
    for r in range(h):
        for c in range(w):
            if gt[r, c] == 0:
                fr, fc = nearest[r, c]
                err_t[r, c] = err[fr, fc]
    ea = smooth(err_t)

    min_e = err.copy()
    fg_mask = gt > 0
    replace = fg_mask & (ea < err)
    min_e[replace] = ea[replace]

    b = np.ones_like(err)
    decay = np.log(0.5) / 5.0
    b[~fg_mask] = 2.0 - np.exp(decay * dist[~fg_mask])
    ew = min_e * b

    sum_fg = ew[fg_mask].sum()
    sum_bg = ew[~fg_mask].sum()
    tpw = n_fg - sum_fg
    fpw = sum_bg
    recall = 1.0 - sum_fg / n_fg
    precision = tpw / (EPS + tpw + fpw)
    return (1.0 + beta2) * precision * recall / (EPS + beta2 * precision + recall)


def main():
    speckle_p, speckle_g = fixture_speckle()
    blob_p, blob_g = fixture_blob()
    inv_p, inv_g = fixture_inverse()

    print(f"s_measure_speckle   = {s_measure(speckle_p, speckle_g):.15f}")
    print(f"s_measure_blob      = {s_measure(blob_p, blob_g):.15f}")
    print(f"s_measure_perfect   = {s_measure(blob_g.copy(), blob_g):.15f}")
    print(f"weighted_f_speckle  = {weighted_f(speckle_p, speckle_g):.15f}")
    print(f"weighted_f_blob     = {weighted_f(blob_p, blob_g):.15f}")
    print(f"weighted_f_inverse  = {weighted_f(inv_p, inv_g):.15f}")


if __name__ == "__main__":
    main()
