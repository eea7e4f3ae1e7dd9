"""Pure-Python method-of-steps stepper (RK4 + cubic Hermite dense output).

All time-dependent inputs are pre-sampled on the half-step grid
``t_j = j * h / 2`` (j = 0 .. 2n), which contains every RK4 stage time.
Lag times ``g[j]`` are known in advance because theta does not depend on N,
so the only state-dependent lookups are into already-computed nodes, or into
the current step when the delay is shorter than h.

Status codes: 0 ok, 1 positivity lost at node/stage ``fail_index``.
"""
import math

import numpy as np


def hermite(y0, d0, y1, d1, s, h):
    """Cubic Hermite interpolant on a unit-scaled interval, s in [0, 1]."""
    s2 = s * s
    s3 = s2 * s
    return ((2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * h * d0
            + (3.0 * s2 - 2.0 * s3) * y1
            + (s3 - s2) * h * d1)


def march(f, n, h, N0, g, hist, floor, check, max_lag_iter):
    """Advance ``n`` RK4 steps of ``y' = f(j, y, y_lag)``.

    ``f`` receives the half-grid index ``j`` of the stage time.  ``hist[j]``
    holds the initial data at ``g[j]`` wherever ``g[j] <= 0``.

    Returns ``(N, D, status, fail_index)``; on failure the arrays are filled
    up to ``fail_index``.
    """
    g = [float(x) for x in g]
    hist = [float(x) for x in hist]
    N = [0.0] * (n + 1)
    D = [0.0] * (n + 1)
    N[0] = N0
    D[0] = f(0, N0, hist[0])
    half = 0.5 * h

    def lag(j, i, trial):
        gj = g[j]
        if gj <= 0.0:
            return hist[j]
        ti = i * h
        if gj <= ti:
            k = int(gj / h)
            if k >= i:
                k = i - 1
            return hermite(N[k], D[k], N[k + 1], D[k + 1], (gj - k * h) / h, h)
        if trial is None:
            return N[i] + D[i] * (gj - ti)
        return hermite(N[i], D[i], trial[0], trial[1], (gj - ti) / h, h)

    for i in range(n):
        y = N[i]
        k1 = D[i]
        ti = i * h
        jm = 2 * i + 1
        je = 2 * i + 2
        rounds = max(1, max_lag_iter) if (g[jm] > ti or g[je] > ti) else 1
        trial = None
        for _ in range(rounds):
            y2 = y + half * k1
            lm = lag(jm, i, trial)
            k2 = f(jm, y2, lm)
            y3 = y + half * k2
            k3 = f(jm, y3, lm)
            y4 = y + h * k3
            le = lag(je, i, trial)
            k4 = f(je, y4, le)
            y_new = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if check and not (y2 > floor and y3 > floor and y4 > floor and y_new > floor):
                N[i + 1] = y_new
                return np.array(N), np.array(D), 1, i + 1
            trial = (y_new, f(je, y_new, lag(je, i, (y_new, k4))))
        N[i + 1] = trial[0]
        D[i + 1] = trial[1]
        if not math.isfinite(trial[0]):
            return np.array(N), np.array(D), 1, i + 1
    return np.array(N), np.array(D), 0, n


def march_hill(h, N0, g, hist, r, b, K, gamma, floor, check, max_lag_iter):
    """Hill-model specialisation used when the compiled kernel is unavailable."""

    r = [float(x) for x in r]
    b = [float(x) for x in b]
    K = [float(x) for x in K]

    def f(j, y, y_lag):
        if y_lag < 0.0:
            return math.nan
        return (r[j] / (1.0 + (y_lag / K[j]) ** gamma) - b[j]) * y

    n = (len(g) - 1) // 2
    return march(f, n, h, N0, g, hist, floor, check, max_lag_iter)
