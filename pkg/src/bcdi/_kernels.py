"""Hot numeric kernels with numba JIT and a pure-numpy fallback.

Set ``BCDI_DISABLE_NUMBA=1`` to force the numpy path (useful for debugging
and for the benchmark in ``benchmarks/bench_kernels.py``). Both paths are
kept numerically equivalent; the test suite exercises whichever is active.
"""

import os

import numpy as np

NUMBA_ENABLED = os.environ.get("BCDI_DISABLE_NUMBA", "0") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit, prange
    except ImportError:
        NUMBA_ENABLED = False

_TWO_PI = 2.0 * np.pi


def _dense_transfer_numpy(w, l, bx, by, kw, kl):
    # Separable form: the (k, l) sum factorizes into a product of two 1-D
    # Dirichlet-type sums, one per axis.
    def axis_matrix(n, nb, ks):
        coord = np.arange(n) - n // 2
        kk = np.arange(ks) - ks // 2
        # phase[k, m, n'] = k * (m/nb - n'/n)
        diff = coord[:, None] / nb - coord[None, :] / n
        return np.exp(-1j * _TWO_PI * kk[:, None, None] * diff[None, :, :]).sum(axis=0)

    tx = axis_matrix(w, bx, kw)
    ty = axis_matrix(l, by, kl)
    # A[(my, mx), (ny, nx)] = ty[my, ny] * tx[mx, nx] / (W*L), row-major flatten
    a = np.einsum("ac,bd->abcd", ty, tx).reshape(w * l, w * l)
    return a.real / (w * l)


if NUMBA_ENABLED:

    @njit(cache=True)
    def _axis_sums_numba(n, nb, ks):  # pragma: no cover - jitted
        re = np.empty((n, n))
        im = np.empty((n, n))
        for m in range(n):
            for p in range(n):
                diff = (m - n // 2) / nb - (p - n // 2) / n
                acc_re = 0.0
                acc_im = 0.0
                for k in range(-(ks // 2), ks - ks // 2):
                    phase = -_TWO_PI * k * diff
                    acc_re += np.cos(phase)
                    acc_im += np.sin(phase)
                re[m, p] = acc_re
                im[m, p] = acc_im
        return re, im

    @njit(cache=True, parallel=True)
    def _dense_transfer_numba(w, l, bx, by, kw, kl):  # pragma: no cover - jitted
        # same separable factorization as the numpy path, explicit loops
        txr, txi = _axis_sums_numba(w, bx, kw)
        tyr, tyi = _axis_sums_numba(l, by, kl)
        n_pix = w * l
        out = np.empty((n_pix, n_pix))
        for m in prange(n_pix):
            my = m // w
            mx = m % w
            for n in range(n_pix):
                ny = n // w
                nx = n % w
                out[m, n] = (tyr[my, ny] * txr[mx, nx]
                             - tyi[my, ny] * txi[mx, nx]) / n_pix
        return out


def dense_transfer_matrix(w, l, bx, by, kw, kl):
    """Brute-force transfer matrix: direct summation of the complex
    exponential kernel over a (kw x kl) window, real part.

    (w, l) is the pattern shape, (bx, by) the padded shape; the sum window
    is (kw, kl) centered at DC. Rows/columns are row-major flattened pixels
    with coordinates relative to the DC pixel.
    """
    if NUMBA_ENABLED:
        return _dense_transfer_numba(w, l, bx, by, kw, kl)
    return _dense_transfer_numpy(w, l, bx, by, kw, kl)


def _bilinear_zoom_numpy(img, r):
    h, w = img.shape
    cy, cx = h // 2, w // 2
    ys = (np.arange(h) - cy) / r + cy
    xs = (np.arange(w) - cx) / r + cx
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    fy = ys - y0
    fx = xs - x0

    def sample(yi, xi):
        valid = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        out = np.zeros((h, w))
        yc = np.clip(yi, 0, h - 1)
        xc = np.clip(xi, 0, w - 1)
        out[valid] = img[yc, xc][valid]
        return out

    yy0, xx0 = np.meshgrid(y0, x0, indexing="ij")
    fyy, fxx = np.meshgrid(fy, fx, indexing="ij")
    return ((1 - fyy) * (1 - fxx) * sample(yy0, xx0)
            + (1 - fyy) * fxx * sample(yy0, xx0 + 1)
            + fyy * (1 - fxx) * sample(yy0 + 1, xx0)
            + fyy * fxx * sample(yy0 + 1, xx0 + 1))


if NUMBA_ENABLED:

    @njit(cache=True)
    def _bilinear_zoom_numba(img, r):  # pragma: no cover - jitted
        h, w = img.shape
        cy, cx = h // 2, w // 2
        out = np.zeros((h, w))
        for i in range(h):
            ys = (i - cy) / r + cy
            y0 = int(np.floor(ys))
            fy = ys - y0
            for j in range(w):
                xs = (j - cx) / r + cx
                x0 = int(np.floor(xs))
                fx = xs - x0
                acc = 0.0
                for dy in range(2):
                    yi = y0 + dy
                    if yi < 0 or yi >= h:
                        continue
                    wy = fy if dy == 1 else 1.0 - fy
                    for dx in range(2):
                        xi = x0 + dx
                        if xi < 0 or xi >= w:
                            continue
                        wx = fx if dx == 1 else 1.0 - fx
                        acc += wy * wx * img[yi, xi]
                out[i, j] = acc
        return out


def bilinear_zoom(img, r):
    """Magnify ``img`` by factor r about its DC pixel with bilinear
    interpolation; zero fill outside the source extent."""
    img = np.ascontiguousarray(img, dtype=np.float64)
    if NUMBA_ENABLED:
        return _bilinear_zoom_numba(img, float(r))
    return _bilinear_zoom_numpy(img, float(r))
