"""Wavelength transfer operator, its adjoint, a dense brute-force oracle,
and the bilinear-interpolation baseline.

The operator maps the reference-wavelength diffraction pattern to the
pattern at wavelength ratio ``r >= 1`` by zero-padding in autocorrelation
space and cropping back in pattern space:

    transfer(x) = CROP[ FFT_B( PAD[ IFFT_W(x) ] ) ]

Its transpose swaps the pad and crop:

    adjoint(z) = (Bx*By)/(W*L) * FFT_W( CROP[ IFFT_B( PAD(z) ) ] )

where the scale factor is fixed by the adjoint identity
<transfer(x), z> == <x, adjoint(z)>.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import centered_fft, centered_ifft, crop_center, pad_center

DENSE_MAX_PIXELS = 4096


@dataclass(frozen=True)
class TransferGeometry:
    """One wavelength channel: base shape, requested ratio, realized padding."""

    shape: tuple  # (height L, width W) of the pattern grid
    ratio: float  # requested wavelength ratio r = lambda_i / lambda_0
    pad: tuple  # (P_y, P_x) zero pixels added per side in autocorrelation space

    @property
    def padded_shape(self):
        return (self.shape[0] + 2 * self.pad[0], self.shape[1] + 2 * self.pad[1])

    @property
    def realized_ratio(self):
        """Ratio actually realized after integer rounding of the padding."""
        return self.padded_shape[1] / self.shape[1]


def geometry_for_ratio(r, shape):
    """Build the channel geometry for wavelength ratio ``r`` on a pattern grid.

    Padding per side is round((r-1)*N/2); the realized ratio is stored and
    should be used downstream in place of the requested one.
    """
    if r < 1:
        raise ValueError(f"wavelength ratio must be >= 1, got {r} "
                         "(longer wavelengths derive from shorter, not vice versa)")
    l, w = shape
    py = int(round((r - 1) * l / 2))
    px = int(round((r - 1) * w / 2))
    return TransferGeometry(shape=(l, w), ratio=float(r), pad=(py, px))


def _check_shape(x, geom):
    if x.shape != geom.shape:
        raise ValueError(f"grid shape {x.shape} does not match geometry {geom.shape}")


def apply_transfer(x, geom):
    """Apply the transfer operator to a real W x L pattern; returns real."""
    _check_shape(x, geom)
    if geom.pad == (0, 0):
        return np.asarray(x, dtype=np.float64).copy()
    a = centered_ifft(x)
    y = centered_fft(pad_center(a, geom.padded_shape))
    return crop_center(y, geom.shape).real


def apply_adjoint(z, geom):
    """Apply the transpose of :func:`apply_transfer` to a real pattern."""
    _check_shape(z, geom)
    if geom.pad == (0, 0):
        return np.asarray(z, dtype=np.float64).copy()
    bs = geom.padded_shape
    a = crop_center(centered_ifft(pad_center(z, bs)), geom.shape)
    scale = (bs[0] * bs[1]) / (geom.shape[0] * geom.shape[1])
    return scale * centered_fft(a).real


def dense_matrix(geom, full_range=False):
    """Explicit (W*L x W*L) transfer matrix by direct kernel summation.

    The brute-force validation oracle for :func:`apply_transfer`. By default
    the frequency sum runs over the base W x L window (the autocorrelation
    is confined there for oversampling >= 2); ``full_range=True`` sums over
    the padded window instead, for cross-checking the truncation.
    """
    l, w = geom.shape
    if w * l > DENSE_MAX_PIXELS:
        raise ValueError(f"dense oracle limited to {DENSE_MAX_PIXELS} pixels, "
                         f"got {w * l}")
    by, bx = geom.padded_shape
    kl, kw = (by, bx) if full_range else (l, w)
    return _kernels.dense_transfer_matrix(w, l, bx, by, kw, kl)


def interpolation_transfer(x, r):
    """Baseline: magnify the pattern by ``r`` about DC with bilinear
    interpolation (the sparse reference method the FFT operator replaces)."""
    if r < 1:
        raise ValueError(f"wavelength ratio must be >= 1, got {r}")
    return _kernels.bilinear_zoom(np.asarray(x, dtype=np.float64), r)
