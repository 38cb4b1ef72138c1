"""Ground-truth factory: phantoms, Fraunhofer patterns, and an independent
per-wavelength broadband simulation route.

``simulate_poly_independent`` builds the broadband pattern from the object
side (re-embed at each wavelength's grid, transform, square, crop) and
never touches the transfer operator, so it can serve as an
inverse-crime-free oracle for the forward model.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .grid import centered_fft, centered_ifft, crop_center, pad_center

# 5x7 digit glyphs, row-major, MSB-left.
_FONT = {
    "0": ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    "2": ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    "3": ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],
    "4": ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    "5": ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    "6": ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    "7": ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    "8": ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    "9": ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
}


@dataclass
class Phantom:
    """Real nonnegative object and its zero-embedded (oversampled) grid."""

    obj: np.ndarray  # w x l object, values in [0, 1]
    embedded: np.ndarray  # W x L with W >= 2w
    provenance: str = ""

    @property
    def oversampling(self):
        return self.embedded.shape[0] / self.obj.shape[0]


def _even_extent(img):
    """Pad with a zero row/column so both extents are even (keeps centered
    embedding exact for every even target grid)."""
    h, w = img.shape
    if h % 2 or w % 2:
        out = np.zeros((h + h % 2, w + w % 2))
        out[:h, :w] = img
        return out
    return img


def _render_digit(ch, extent):
    rows = _FONT[ch]
    bitmap = np.array([[float(c) for c in row] for row in rows])
    sy = max(extent // bitmap.shape[0], 1)
    sx = max(extent // bitmap.shape[1], 1)
    img = np.kron(bitmap, np.ones((sy, sx)))
    img = gaussian_filter(img, sigma=max(min(sy, sx) / 3.0, 0.5))
    out = np.zeros((extent, extent))
    h, w = img.shape
    oy = (extent - min(h, extent)) // 2
    ox = (extent - min(w, extent)) // 2
    out[oy:oy + min(h, extent), ox:ox + min(w, extent)] = img[:extent, :extent]
    return out / out.max()


def _render_disk(extent):
    c = (extent - 1) / 2
    radius = 0.3 * extent
    yy, xx = np.mgrid[0:extent, 0:extent]
    dist = np.hypot(yy - c, xx - c)
    return np.clip(radius - dist + 0.5, 0.0, 1.0)


def _render_blobs(extent, seed=0):
    rng = np.random.default_rng(seed)
    img = np.zeros((extent, extent))
    yy, xx = np.mgrid[0:extent, 0:extent]
    for _ in range(5):
        cy, cx = rng.uniform(0.25 * extent, 0.75 * extent, 2)
        s = rng.uniform(0.05, 0.12) * extent
        img += rng.uniform(0.4, 1.0) * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * s * s))
    return img / img.max()


def builtin_phantom_image(name, extent):
    """Procedural test objects: "disk", "blobs", or "digit0".."digit9"."""
    if name == "disk":
        return _render_disk(extent)
    if name == "blobs":
        return _render_blobs(extent)
    if name.startswith("digit") and name[5:] in _FONT:
        return _render_digit(name[5:], extent)
    raise ValueError(f"unknown builtin phantom {name!r}")


def read_pgm(path):
    """Binary (P5) 8/16-bit grayscale PGM reader, normalized to [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM (P5) file")
    # header tokens: magic, width, height, maxval; '#' comments allowed
    tokens = []
    i = 2
    while len(tokens) < 3:
        while i < len(data) and data[i:i + 1].isspace():
            i += 1
        if data[i:i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j:j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    i += 1  # single whitespace after maxval
    width, height, maxval = (int(t) for t in tokens)
    if maxval < 256:
        img = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=i)
    else:
        img = np.frombuffer(data, dtype=">u2", count=width * height, offset=i)
    return img.reshape(height, width).astype(np.float64) / maxval


def load_phantom(source, embed_shape, extent=None):
    """Build a phantom from a builtin name or a PGM file, zero-embedded and
    centered in ``embed_shape``. The oversampling ratio must be >= 2."""
    eh, ew = embed_shape
    if isinstance(source, str) and (source == "disk" or source == "blobs"
                                    or source.startswith("digit")):
        extent = extent if extent is not None else min(eh, ew) // 2
        obj = builtin_phantom_image(source, extent)
        provenance = f"builtin:{source}"
    else:
        obj = read_pgm(source)
        provenance = f"file:{source}"
    m = obj.max()
    if m <= 0:
        raise ValueError("phantom image is identically zero")
    obj = _even_extent(obj / m)
    if eh < 2 * obj.shape[0] or ew < 2 * obj.shape[1]:
        raise ValueError(f"embed shape {embed_shape} gives oversampling < 2 "
                         f"for object extent {obj.shape}")
    return Phantom(obj=obj, embedded=pad_center(obj, embed_shape), provenance=provenance)


def embed_unchecked(obj, embed_shape):
    """Embed without the oversampling guard (for negative tests)."""
    return Phantom(obj=_even_extent(obj), embedded=pad_center(_even_extent(obj), embed_shape),
                   provenance="unchecked")


def simulate_mono(phantom):
    """Fraunhofer intensity of the embedded object at the reference
    wavelength: |FFT(object)|^2."""
    return np.abs(centered_fft(phantom.embedded)) ** 2


def simulate_poly_independent(phantom, spec, max_grid=8192):
    """Broadband pattern by per-wavelength re-embedding of the object.

    Each channel embeds the object into that wavelength's padded grid,
    transforms, squares, and crops back to the base grid. No per-channel
    rescaling is needed: with the unnormalized forward DFT the intensity
    equals FFT(autocorrelation) on either grid size.
    """
    base = phantom.embedded.shape
    if spec.bound_shape != base:
        spec = spec.bind(base)
    out = np.zeros(base)
    for geom, w in spec.channels():
        by, bx = geom.padded_shape
        if by > max_grid or bx > max_grid:
            raise ValueError(f"padded grid {geom.padded_shape} exceeds limit {max_grid}")
        obj_b = pad_center(phantom.embedded, (by, bx))
        pattern_b = np.abs(centered_fft(obj_b)) ** 2
        out += w * crop_center(pattern_b, base)
    return out


def lowfreq_shape(shape, r_max):
    """Central block provably recoverable at maximum ratio ``r_max``,
    adjusted so the crop differences stay even."""
    out = []
    for n in shape:
        s = max(int(n / r_max), 2)
        if (n - s) % 2:
            s -= 1
        out.append(max(s, 2))
    return tuple(out)


def pattern_nrmse(x, ref, region="full", r_max=None):
    """Relative error ||x - ref|| / ||ref|| over the full grid or the central
    low-frequency block (size shape / r_max)."""
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise ValueError(f"shape mismatch {x.shape} vs {ref.shape}")
    if region == "low-frequency":
        if r_max is None:
            raise ValueError("low-frequency region needs r_max")
        block = lowfreq_shape(x.shape, r_max)
        x = crop_center(x, block)
        ref = crop_center(ref, block)
    elif region != "full":
        raise ValueError(f"unknown region {region!r}")
    return float(np.linalg.norm(x - ref) / np.linalg.norm(ref))


def add_noise(b, model="poisson", photons=1e8, sigma=0.0, seed=0):
    """Seeded measurement noise; Poisson rescales to a photon budget and
    preserves nonnegativity, Gaussian adds sigma-scaled white noise."""
    rng = np.random.default_rng(seed)
    b = np.asarray(b, dtype=np.float64)
    if model == "poisson":
        total = b.sum()
        if total <= 0:
            return b.copy()
        lam = np.maximum(b, 0.0) / total * photons
        return rng.poisson(lam).astype(np.float64) * (total / photons)
    if model == "gaussian":
        if sigma == 0:
            return b.copy()
        return b + sigma * rng.standard_normal(b.shape)
    raise ValueError(f"unknown noise model {model!r}")


def autocorrelation(pattern):
    """Inverse transform of the intensity (complex; |.| is the usual view)."""
    return centered_ifft(pattern)
