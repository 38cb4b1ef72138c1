"""Object reconstruction from a diffraction pattern: HIO and RAAR with
periodic shrink-wrap support refinement, plus the registration metric used
to score reconstructions against ground truth.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .grid import centered_fft, centered_ifft


@dataclass
class RetrievalConfig:
    algorithm: str = "HIO"  # "HIO" or "RAAR"
    beta: float = 0.9
    iterations: int = 2000
    shrinkwrap_interval: int = 20
    shrinkwrap_sigma: float = 3.0  # initial blur width, pixels
    sigma_decay: float = 0.98  # multiplied in per shrink-wrap update
    sigma_min: float = 1.5
    shrinkwrap_threshold: float = 0.1  # fraction of blurred-magnitude max
    support_threshold: float = 0.04  # initial autocorrelation mask threshold
    real_object: bool = True
    positivity: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ("HIO", "RAAR"):
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0 < self.beta < 1:
            raise ValueError("beta must be in (0, 1)")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 < self.shrinkwrap_threshold < 1:
            raise ValueError("shrink-wrap threshold must be in (0, 1)")
        if self.shrinkwrap_sigma <= 0:
            raise ValueError("shrink-wrap sigma must be positive")


@dataclass
class RetrievalState:
    obj: np.ndarray  # complex object estimate
    amplitude: np.ndarray  # measured Fourier amplitudes (sqrt of pattern)
    support: np.ndarray  # boolean mask
    cfg: RetrievalConfig
    sigma: float
    n: int = 0
    trace: list = field(default_factory=list)  # (iteration, E_F, support_area)


def fourier_project(obj, amplitude):
    """Replace the Fourier modulus of ``obj`` by the measured amplitude."""
    g = centered_fft(obj)
    mag = np.abs(g)
    phase = np.where(mag > 0, g / np.where(mag > 0, mag, 1.0), 1.0)
    return centered_ifft(amplitude * phase)


def support_project(obj, support, real_object=True, positivity=True):
    """Project onto the support constraint set (realness and non-negativity
    inside the support when configured; zero outside)."""
    if real_object:
        est = obj.real
        if positivity:
            est = np.maximum(est, 0.0)
        return np.where(support, est, 0.0).astype(np.complex128)
    return np.where(support, obj, 0.0)


def init_retrieval(pattern, cfg):
    """Initial object with random phases, plus the autocorrelation support."""
    pattern = np.asarray(pattern, dtype=np.float64)
    if not np.any(pattern > 0):
        raise ValueError("pattern is identically zero")
    clipped = np.maximum(pattern, 0.0)
    amplitude = np.sqrt(clipped)
    rng = np.random.default_rng(cfg.seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, pattern.shape)
    obj = centered_ifft(amplitude * np.exp(1j * phases))
    acorr = np.abs(centered_ifft(clipped))
    support = acorr > cfg.support_threshold * acorr.max()
    return RetrievalState(obj=obj, amplitude=amplitude, support=support,
                          cfg=cfg, sigma=cfg.shrinkwrap_sigma)


def hio_iterate(state):
    """One hybrid input-output step with feedback beta outside the
    constraint-satisfying region."""
    cfg = state.cfg
    est = fourier_project(state.obj, state.amplitude)
    good = state.support.copy()
    if cfg.real_object:
        val = est.real
        if cfg.positivity:
            good &= val >= 0
        inside = val.astype(np.complex128)
    else:
        inside = est
    state.obj = np.where(good, inside, state.obj - cfg.beta * est)
    state.n += 1
    return state


def raar_iterate(state):
    """One relaxed averaged alternating reflections step:
    x <- beta/2 * (x + R_S R_M x) + (1 - beta) * P_M x."""
    cfg = state.cfg
    x = state.obj
    pm = fourier_project(x, state.amplitude)
    rm = 2.0 * pm - x
    rs = 2.0 * support_project(rm, state.support, cfg.real_object, cfg.positivity) - rm
    state.obj = 0.5 * cfg.beta * (x + rs) + (1.0 - cfg.beta) * pm
    state.n += 1
    return state


def shrinkwrap(state):
    """Re-estimate the support by thresholding the blurred object magnitude;
    the blur width decays toward its floor."""
    blurred = gaussian_filter(np.abs(state.obj), state.sigma)
    state.support = blurred > state.cfg.shrinkwrap_threshold * blurred.max()
    state.sigma = max(state.sigma * state.cfg.sigma_decay, state.cfg.sigma_min)
    return state


def fourier_error(state):
    """Relative Fourier-modulus mismatch of the current object."""
    mod = np.abs(centered_fft(state.obj))
    denom = np.linalg.norm(state.amplitude)
    return float(np.linalg.norm(mod - state.amplitude) / denom)


def run_retrieval(pattern, cfg):
    """Full schedule: iterate with shrink-wrap every ``shrinkwrap_interval``
    iterations; final object is constrained to the support."""
    state = init_retrieval(pattern, cfg)
    step = hio_iterate if cfg.algorithm == "HIO" else raar_iterate
    for _ in range(cfg.iterations):
        step(state)
        if cfg.shrinkwrap_interval > 0 and state.n % cfg.shrinkwrap_interval == 0:
            shrinkwrap(state)
        state.trace.append((state.n, fourier_error(state), int(state.support.sum())))
    state.obj = support_project(fourier_project(state.obj, state.amplitude),
                                state.support, cfg.real_object, cfg.positivity)
    return state


def run_retrieval_multi(pattern, cfg, restarts=8, threads=1):
    """Best-of-N restarts (seeds cfg.seed..cfg.seed+N-1) by final Fourier
    error; returns (best_state, all_states). Ties pick the lowest seed."""
    from dataclasses import replace

    cfgs = [replace(cfg, seed=cfg.seed + i) for i in range(restarts)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            states = list(pool.map(lambda c: run_retrieval(pattern, c), cfgs))
    else:
        states = [run_retrieval(pattern, c) for c in cfgs]
    errors = [fourier_error(s) for s in states]
    best = int(np.argmin(errors))
    return states[best], states


def register_and_compare(obj, ref):
    """Best normalized correlation over all cyclic translations of ``obj``
    and of its point-reflected conjugate twin against ``ref``.

    Returns (score, info) with info = {"shift": (dy, dx), "twin": bool};
    shift s maximizes sum_n obj[n + s] * conj(ref[n]).
    """
    obj = np.asarray(obj)
    ref = np.asarray(ref)
    denom = np.linalg.norm(obj) * np.linalg.norm(ref)
    if denom == 0:
        return 0.0, {"shift": (0, 0), "twin": False}
    fr = np.conj(np.fft.fft2(ref))
    best = (-np.inf, (0, 0), False)
    for twin in (False, True):
        cand = np.conj(obj[::-1, ::-1]) if twin else obj
        if twin:
            cand = np.roll(cand, (1, 1), axis=(0, 1))  # reflection about index 0
        corr = np.fft.ifft2(np.fft.fft2(cand) * fr).real
        idx = np.unravel_index(np.argmax(corr), corr.shape)
        score = corr[idx] / denom
        if score > best[0]:
            # corr[s] peaks where obj shifted by -s matches ref
            h, w = obj.shape
            dy = idx[0] if idx[0] <= h // 2 else idx[0] - h
            dx = idx[1] if idx[1] <= w // 2 else idx[1] - w
            best = (float(score), (dy, dx), twin)
    return best[0], {"shift": best[1], "twin": best[2]}
