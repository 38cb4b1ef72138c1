"""Spectrum representation and the polychromatic forward model
b = sum_i a_i * transfer_i(x), plus its adjoint.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import centered_fft, centered_ifft, crop_center, pad_center
from .transfer import apply_adjoint, apply_transfer, geometry_for_ratio


@dataclass
class Spectrum:
    """Ordered wavelength channels (ratio r_i >= 1, weight a_i >= 0).

    Ratios are strictly increasing and anchored at 1 (the reference,
    shortest wavelength). ``bind`` attaches per-channel transfer geometries
    for a fixed grid shape, merging channels whose integer padding
    coincides (weights add; the forward model is unchanged).
    """

    ratios: np.ndarray
    weights: np.ndarray
    _shape: tuple = field(default=None, repr=False)
    _geoms: list = field(default=None, repr=False)
    _merged_weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        r = np.asarray(self.ratios, dtype=np.float64)
        a = np.asarray(self.weights, dtype=np.float64)
        if r.size == 0:
            raise ValueError("spectrum needs at least one channel")
        if r.size != a.size:
            raise ValueError("ratios and weights must have equal length")
        if not np.all(np.isfinite(r)) or not np.all(np.isfinite(a)):
            raise ValueError("non-finite spectrum entry")
        if np.any(a < 0) or not np.any(a > 0):
            raise ValueError("weights must be >= 0 with at least one > 0")
        order = np.argsort(r)
        r = r[order]
        a = a[order]
        if np.any(np.diff(r) <= 0):
            raise ValueError("ratios must be strictly increasing")
        r = r / r[0]  # anchor the shortest wavelength at ratio 1
        self.ratios = r
        self.weights = a

    @property
    def total_weight(self):
        return float(self.weights.sum())

    def scaled(self, factor):
        """New spectrum with all weights multiplied by ``factor``."""
        return Spectrum(self.ratios.copy(), self.weights * factor)

    def bind(self, shape):
        """Attach transfer geometries for a pattern grid shape (in place)."""
        geoms = {}
        weights = {}
        for r, a in zip(self.ratios, self.weights):
            g = geometry_for_ratio(r, shape)
            weights[g.pad] = weights.get(g.pad, 0.0) + a
            geoms[g.pad] = g
        pads = sorted(geoms)
        self._shape = tuple(shape)
        self._geoms = [geoms[p] for p in pads]
        self._merged_weights = np.array([weights[p] for p in pads])
        return self

    @property
    def bound_shape(self):
        return self._shape

    def channels(self):
        """Merged (geometry, weight) pairs; requires a bound shape."""
        if self._geoms is None:
            raise ValueError("spectrum is not bound to a grid shape")
        return list(zip(self._geoms, self._merged_weights))


def harmonics_spectrum(orders, weights):
    """Spectrum of laser harmonics; harmonic q has wavelength ~ 1/q, so the
    highest order is the reference channel (ratio 1)."""
    orders = list(orders)
    weights = list(weights)
    if len(orders) != len(weights):
        raise ValueError("orders and weights must have equal length")
    if any(q <= 0 for q in orders):
        raise ValueError("harmonic orders must be positive")
    qmax = max(orders)
    ratios = [qmax / q for q in orders]
    return Spectrum(np.array(ratios), np.array(weights, dtype=np.float64))


def continuous_spectrum(center, fractional_bandwidth, n_points):
    """Uniformly sampled continuous spectrum over
    [center*(1-bw/2), center*(1+bw/2)], weighted by a Gaussian profile
    centered at ``center`` with FWHM = bw*center, peak-normalized to 1.
    """
    if not 0 < fractional_bandwidth < 2:
        raise ValueError(f"fractional bandwidth must be in (0, 2), got {fractional_bandwidth}")
    if n_points < 2:
        raise ValueError("need at least 2 sample points")
    half = fractional_bandwidth / 2
    lam = np.linspace(center * (1 - half), center * (1 + half), n_points)
    fwhm = fractional_bandwidth * center
    w = np.exp(-4 * math.log(2) * ((lam - center) / fwhm) ** 2)
    w /= w.max()
    return Spectrum(lam / lam[0], w)


def _check_bound(x, spec):
    if spec.bound_shape is None:
        raise ValueError("spectrum is not bound to a grid shape")
    if x.shape != spec.bound_shape:
        raise ValueError(f"grid shape {x.shape} does not match bound shape {spec.bound_shape}")


def apply_poly(x, spec):
    """Broadband forward model: weighted sum of per-channel transfers."""
    _check_bound(x, spec)
    out = np.zeros_like(x, dtype=np.float64)
    a_ref = None
    for geom, w in spec.channels():
        if geom.pad == (0, 0):
            out += w * x
            continue
        if a_ref is None:
            a_ref = centered_ifft(x)
        y = centered_fft(pad_center(a_ref, geom.padded_shape))
        out += w * crop_center(y, geom.shape).real
    return out


def apply_poly_adjoint(z, spec):
    """Transpose of :func:`apply_poly`."""
    _check_bound(z, spec)
    out = np.zeros_like(z, dtype=np.float64)
    acc = None  # autocorrelation-space accumulator for padded channels
    l, w_ = z.shape
    for geom, w in spec.channels():
        if geom.pad == (0, 0):
            out += w * z
            continue
        bs = geom.padded_shape
        a = crop_center(centered_ifft(pad_center(z, bs)), geom.shape)
        scale = w * (bs[0] * bs[1]) / (l * w_)
        acc = scale * a if acc is None else acc + scale * a
    if acc is not None:
        out += centered_fft(acc).real
    return out
