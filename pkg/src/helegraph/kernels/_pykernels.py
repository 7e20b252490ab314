"""NumPy reference implementations of the O(N^2) quadrature sums.

Each loop runs over the offset k and is vectorised over the evaluation node,
so the cost is N/2 array operations of length N.
"""

import numpy as np


def linear_sum(u, du, wkp, wkm, hc):
    """sum_k wkp[k] (u[i+k]-u[i]-hc[k] du[i]) + wkm[k] (u[i-k]-u[i]+hc[k] du[i])."""
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    out = np.zeros_like(u)
    for k in np.nonzero((np.asarray(wkp) != 0) | (np.asarray(wkm) != 0))[0]:
        up = np.roll(u, -k)
        um = np.roll(u, k)
        out += wkp[k] * (up - u - hc[k] * du) + wkm[k] * (um - u + hc[k] * du)
    return out


def extremal_sum(u, wk, lam_pos, lam_neg):
    """sum_k wk[k] F(u[i+k] + u[i-k] - 2 u[i]), F(d) = lam_pos d (d > 0), lam_neg d (d < 0)."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    for k in np.nonzero(np.asarray(wk) != 0)[0]:
        d = np.roll(u, -k) + np.roll(u, k) - 2.0 * u
        out += wk[k] * np.where(d > 0.0, lam_pos * d, lam_neg * d)
    return out


def muskat_sum(f, df, dx, diag):
    """Periodic trapezoid sum of [f(y)-f(x)-(y-x)f'(x)] / ((y-x)^2 + (f(y)-f(x))^2).

    Offsets run over -N/2..N/2 with half weight at both ends; the k = 0 node uses
    ``diag``, the limit of the integrand.
    """
    f = np.asarray(f, dtype=float)
    df = np.asarray(df, dtype=float)
    n = f.size
    half = n // 2
    out = dx * np.asarray(diag, dtype=float)
    for k in range(1, half + 1):
        w = 0.5 * dx if k == half else dx
        h = k * dx
        for s in (1, -1):
            fy = np.roll(f, -s * k)
            dfy = fy - f
            out = out + w * (dfy - s * h * df) / (h * h + dfy * dfy)
    return out


def muskat_window_sum(f, df, x, diag):
    """Non-periodic variant: trapezoid over the sample window for every node."""
    f = np.asarray(f, dtype=float)
    df = np.asarray(df, dtype=float)
    x = np.asarray(x, dtype=float)
    n = f.size
    w = np.full(n, x[1] - x[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    h = x[None, :] - x[:, None]
    dfy = f[None, :] - f[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        g = (dfy - h * df[:, None]) / (h * h + dfy * dfy)
    idx = np.arange(n)
    g[idx, idx] = diag
    return g @ w
