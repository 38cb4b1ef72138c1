"""Centered 2-D FFTs and symmetric pad/crop primitives.

All arrays are row-major 2-D numpy arrays with the DC (zero-frequency)
pixel at index (H//2, W//2). The forward transform is unnormalized; the
inverse carries the 1/(H*W) factor, so ``centered_ifft(centered_fft(g)) == g``.
"""

import numpy as np


class ShapeError(ValueError):
    """Raised when a pad/crop target is incompatible with the source grid."""


def dc_index(shape):
    """Index of the DC pixel for a (height, width) shape."""
    return (shape[0] // 2, shape[1] // 2)


def centered_fft(g):
    """Forward DFT with DC centered in both input and output."""
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(g)))


def centered_ifft(g):
    """Inverse of :func:`centered_fft`; carries the 1/(H*W) normalization."""
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(g)))


def _check_even_diff(src, dst):
    dh = dst[0] - src[0]
    dw = dst[1] - src[1]
    if dh % 2 or dw % 2:
        raise ShapeError(f"shape change {src} -> {dst} must be even per axis")
    return dh // 2, dw // 2


def pad_center(g, target):
    """Zero-pad symmetrically so the DC pixel stays at the target's DC pixel.

    Target must be at least as large as the source with even differences.
    """
    h, w = g.shape
    th, tw = target
    if th < h or tw < w:
        raise ShapeError(f"pad target {target} smaller than source {g.shape}")
    ph, pw = _check_even_diff(g.shape, target)
    out = np.zeros((th, tw), dtype=g.dtype)
    out[ph:ph + h, pw:pw + w] = g
    return out


def crop_center(g, target):
    """Central crop preserving the DC pixel; transpose of :func:`pad_center`."""
    h, w = g.shape
    th, tw = target
    if th > h or tw > w:
        raise ShapeError(f"crop target {target} larger than source {g.shape}")
    ch, cw = _check_even_diff(target, g.shape)
    return g[ch:ch + th, cw:cw + tw].copy()
