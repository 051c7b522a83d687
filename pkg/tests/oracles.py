"""Independent reference implementations used only by the tests."""

import math

import numpy as np


def naive_dct2(x):
    """Orthonormal DCT-II straight from the cosine-sum definition."""
    x = [float(v) for v in x]
    n = len(x)
    out = []
    for k in range(n):
        s = math.sqrt(1.0 / n) if k == 0 else math.sqrt(2.0 / n)
        out.append(s * sum(x[t] * math.cos(math.pi * (2 * t + 1) * k / (2 * n)) for t in range(n)))
    return out


def naive_delta(x, window):
    n = len(x)
    pad = lambda t: x[min(max(t, 0), n - 1)]  # noqa: E731
    denom = 2 * sum(k * k for k in range(1, window + 1))
    return [sum(k * (pad(t + k) - pad(t - k)) for k in range(1, window + 1)) / denom
            for t in range(n)]


def two_pass_std(x):
    n = len(x)
    mean = sum(x) / n
    return math.sqrt(sum((v - mean) ** 2 for v in x) / n)


def exhaustive_best_split(X, y):
    """Scan every (feature, midpoint) and return the minimum summed child SSE split."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    best = None
    for f in range(X.shape[1]):
        vals = sorted(set(X[:, f]))
        for a, b in zip(vals, vals[1:]):
            thr = (a + b) / 2
            left, right = y[X[:, f] <= thr], y[X[:, f] > thr]
            sse = ((left - left.mean()) ** 2).sum() + ((right - right.mean()) ** 2).sum()
            if best is None or sse < best[0] - 1e-12:
                best = (sse, f, thr)
    return best


def argmin_std_scan(inputs, priority=("audio", "text", "video")):
    best = None
    for p in inputs:
        key = (p.std, priority.index(str(p.modality)))
        if best is None or key < best[0]:
            best = (key, p)
    return best[1]
