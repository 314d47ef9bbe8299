"""Independent brute-force reference implementations used as test oracles.

Everything here is deliberately naive (plain loops, direct formula
transcription) and stays independent of the library code paths it checks.
"""

import math


def otsu_exhaustive(values):
    """Argmax of between-class variance over all 256 thresholds.

    Class 0 = intensities <= t, class 1 = the rest; ties resolve to the
    smallest t; a constant image returns its constant value.
    """
    values = [int(v) for v in values]
    if min(values) == max(values):
        return values[0]
    n = len(values)
    best_t, best_sigma = 0, -1.0
    for t in range(256):
        c0 = [v for v in values if v <= t]
        c1 = [v for v in values if v > t]
        if not c0 or not c1:
            sigma = 0.0
        else:
            w0 = len(c0) / n
            w1 = len(c1) / n
            mu0 = sum(c0) / len(c0)
            mu1 = sum(c1) / len(c1)
            sigma = w0 * w1 * (mu0 - mu1) ** 2
        if sigma > best_sigma:
            best_sigma = sigma
            best_t = t
    return best_t


def otsu_exhaustive_hist(values):
    """Same exhaustive 256-threshold scan, evaluated incrementally from the
    histogram so large batches stay fast. Agrees with otsu_exhaustive."""
    values = [int(v) for v in values]
    if min(values) == max(values):
        return values[0]
    hist = [0] * 256
    for v in values:
        hist[v] += 1
    n = len(values)
    total_sum = sum(v * hist[v] for v in range(256))
    best_t, best_sigma = 0, -1.0
    count0 = 0
    sum0 = 0.0
    for t in range(256):
        count0 += hist[t]
        sum0 += t * hist[t]
        count1 = n - count0
        if count0 == 0 or count1 == 0:
            sigma = 0.0
        else:
            w0 = count0 / n
            w1 = count1 / n
            mu0 = sum0 / count0
            mu1 = (total_sum - sum0) / count1
            sigma = w0 * w1 * (mu0 - mu1) ** 2
        if sigma > best_sigma:
            best_sigma = sigma
            best_t = t
    return best_t


def moments_double_loop(mask_rows):
    """Raw and central moments of a boolean mask via direct double sums."""
    raw = {}
    for p in range(4):
        for q in range(4 - p):
            total = 0.0
            for y, row in enumerate(mask_rows):
                for x, on in enumerate(row):
                    if on:
                        total += (x ** p) * (y ** q)
            raw[(p, q)] = total
    m00 = raw[(0, 0)]
    cx = raw[(1, 0)] / m00
    cy = raw[(0, 1)] / m00
    central = {}
    for p in range(4):
        for q in range(4 - p):
            total = 0.0
            for y, row in enumerate(mask_rows):
                for x, on in enumerate(row):
                    if on:
                        total += ((x - cx) ** p) * ((y - cy) ** q)
            central[(p, q)] = total
    return raw, central


def glcm_pair_enumeration(quantized_rows, levels, offset):
    """Symmetric normalized co-occurrence matrix by explicit pair listing."""
    dx, dy = offset
    h = len(quantized_rows)
    w = len(quantized_rows[0])
    mat = [[0.0] * levels for _ in range(levels)]
    count = 0
    for y in range(h):
        for x in range(w):
            x2, y2 = x + dx, y + dy
            if 0 <= x2 < w and 0 <= y2 < h:
                a = quantized_rows[y][x]
                b = quantized_rows[y2][x2]
                mat[a][b] += 1
                mat[b][a] += 1  # symmetric: accumulate -d too
                count += 2
    if count == 0:
        raise ValueError("no pixel pairs for offset")
    for i in range(levels):
        for j in range(levels):
            mat[i][j] /= count
    return mat


def _log2_or_zero(x):
    return math.log2(x) if x > 0 else 0.0


def haralick_reference(p):
    """Direct transcription of the 13 stable GLCM statistics.

    p: normalized symmetric matrix as list of lists. Degenerate conventions
    match the library contract: correlation = 0 when a marginal variance
    vanishes, information measures = 0 when their denominators do,
    0 log 0 = 0.
    """
    g = len(p)
    px = [sum(p[i][j] for j in range(g)) for i in range(g)]
    py = [sum(p[i][j] for i in range(g)) for j in range(g)]
    mu_x = sum(i * px[i] for i in range(g))
    mu_y = sum(j * py[j] for j in range(g))
    var_x = sum((i - mu_x) ** 2 * px[i] for i in range(g))
    var_y = sum((j - mu_y) ** 2 * py[j] for j in range(g))

    p_sum = [0.0] * (2 * g - 1)
    p_diff = [0.0] * g
    for i in range(g):
        for j in range(g):
            p_sum[i + j] += p[i][j]
            p_diff[abs(i - j)] += p[i][j]

    f1 = sum(p[i][j] ** 2 for i in range(g) for j in range(g))
    f2 = sum(k * k * p_diff[k] for k in range(g))
    if var_x > 0 and var_y > 0:
        f3 = (sum(i * j * p[i][j] for i in range(g) for j in range(g))
              - mu_x * mu_y) / math.sqrt(var_x * var_y)
    else:
        f3 = 0.0
    f4 = sum((i - mu_x) ** 2 * p[i][j] for i in range(g) for j in range(g))
    f5 = sum(p[i][j] / (1.0 + (i - j) ** 2) for i in range(g) for j in range(g))
    f6 = sum(k * p_sum[k] for k in range(2 * g - 1))
    f7 = sum((k - f6) ** 2 * p_sum[k] for k in range(2 * g - 1))
    f8 = -sum(v * _log2_or_zero(v) for v in p_sum)
    f9 = -sum(p[i][j] * _log2_or_zero(p[i][j]) for i in range(g) for j in range(g))
    mu_diff = sum(k * p_diff[k] for k in range(g))
    f10 = sum((k - mu_diff) ** 2 * p_diff[k] for k in range(g))
    f11 = -sum(v * _log2_or_zero(v) for v in p_diff)

    hx = -sum(v * _log2_or_zero(v) for v in px)
    hy = -sum(v * _log2_or_zero(v) for v in py)
    hxy1 = -sum(
        p[i][j] * _log2_or_zero(px[i] * py[j])
        for i in range(g) for j in range(g)
    )
    hxy2 = -sum(
        px[i] * py[j] * _log2_or_zero(px[i] * py[j])
        for i in range(g) for j in range(g)
    )
    denom = max(hx, hy)
    f12 = (f9 - hxy1) / denom if denom > 0 else 0.0
    arg = 1.0 - math.exp(-2.0 * (hxy2 - f9))
    f13 = math.sqrt(arg) if arg > 0 else 0.0
    return [f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13]


class CursorSamplerSimulation:
    """Reference simulation of the cursor-and-reset draw procedure for one
    category: verifies that every full pass over the pool is a permutation."""

    def __init__(self, pool_size):
        self.pool_size = pool_size
        self.draws = []

    def record(self, index):
        self.draws.append(index)

    def passes_are_permutations(self, pool):
        pool = sorted(pool)
        full = len(self.draws) // self.pool_size
        for k in range(full):
            window = self.draws[k * self.pool_size:(k + 1) * self.pool_size]
            if sorted(window) != pool:
                return False
        return True

    def occurrence_bounds(self):
        counts = {}
        for d in self.draws:
            counts[d] = counts.get(d, 0) + 1
        return (min(counts.values()) if counts else 0,
                max(counts.values()) if counts else 0)
