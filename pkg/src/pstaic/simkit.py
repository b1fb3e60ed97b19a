"""Synthetic TIRF-like data: phantoms, an NA-parameterised PSF, noise and metrics."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage, stats
from skimage.metrics import structural_similarity

from . import linops
from .grids import as_volume

__all__ = [
    "SCENES",
    "PhantomSpec",
    "DegradeSpec",
    "MetricPair",
    "make_phantom",
    "make_psf",
    "psf_sigma_px",
    "blur",
    "degrade",
    "snr_db",
    "ssim",
    "metrics",
    "SNR_CAP",
]

SCENES = ("moving-disks", "filaments-drift", "static-texture")
SNR_CAP = 300.0
BACKGROUND = 0.05
EDGE_SIGMA = 0.5


@dataclass(frozen=True)
class PhantomSpec:
    shape: tuple = (8, 64, 64)  # (T, H, W)
    scene: str = "moving-disks"
    motion: float = 1.0  # pixels per frame
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        if len(self.shape) != 3 or min(self.shape) < 1:
            raise ValueError(f"phantom shape must be (T, H, W) with positive extents, got {self.shape}")
        if min(self.shape[1:]) < 8:
            raise ValueError("phantom frames must be at least 8 x 8")
        if self.scene not in SCENES:
            raise ValueError(f"unknown scene {self.scene!r}; expected one of {SCENES}")
        if self.motion < 0:
            raise ValueError("motion amplitude must be non-negative")

    def to_dict(self):
        d = asdict(self)
        d["shape"] = list(self.shape)
        return d


@dataclass(frozen=True)
class DegradeSpec:
    """Imaging and noise parameters.

    ``sigma_g=None`` sets the Gaussian read noise to 2% of gamma_p times the
    ground-truth peak, which does not depend on the blur.
    """

    na: float = 1.0
    wavelength_nm: float = 500.0
    pixel_nm: float = 100.0
    gamma_p: float = 1.0
    sigma_g: float | None = None
    boundary: str = "periodic"

    def __post_init__(self):
        if not self.na > 0:
            raise ValueError("NA must be positive")
        if not (self.wavelength_nm > 0 and self.pixel_nm > 0):
            raise ValueError("wavelength and pixel pitch must be positive")
        if self.gamma_p < 0:
            raise ValueError("gamma_p must be non-negative")
        if self.sigma_g is not None and self.sigma_g < 0:
            raise ValueError("sigma_g must be non-negative")
        linops.Boundary(self.boundary)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class MetricPair:
    snr_db: float
    ssim: float


def _soft_disk(yy, xx, cy, cx, radius):
    dist = np.hypot(yy - cy, xx - cx)
    return np.clip(radius - dist + 0.5, 0.0, 1.0)


def _moving_disks(spec, rng):
    T, H, W = spec.shape
    yy, xx = np.mgrid[0:H, 0:W].astype(float)
    n = max(3, (H * W) // 400)
    centers = rng.uniform(0.2, 0.8, size=(n, 2)) * (H, W)
    radii = rng.uniform(0.05, 0.12, size=n) * min(H, W)
    levels = rng.uniform(0.4, 0.9, size=n)
    angles = rng.uniform(0, 2 * np.pi, size=n)
    # half the disks drift, the rest stay put
    moving = np.arange(n) % 2 == 0
    out = np.full(spec.shape, BACKGROUND)
    for t in range(T):
        for c, r, a, th, mv in zip(centers, radii, levels, angles, moving):
            shift = spec.motion * (t - (T - 1) / 2) * mv
            cy = c[0] + shift * np.sin(th)
            cx = c[1] + shift * np.cos(th)
            out[t] += a * _soft_disk(yy, xx, cy, cx, r)
    # fluorescent objects are seen through the optics: no hard edges
    return ndimage.gaussian_filter(out, sigma=(0, EDGE_SIGMA, EDGE_SIGMA), mode="wrap")


def _filaments(spec, rng):
    T, H, W = spec.shape
    yy, xx = np.mgrid[0:H, 0:W].astype(float)
    n = max(3, min(H, W) // 10)
    points = rng.uniform(0.15, 0.85, size=(n, 2)) * (H, W)
    angles = rng.uniform(0, np.pi, size=n)
    levels = rng.uniform(0.5, 0.9, size=n)
    drift_angle = rng.uniform(0, 2 * np.pi)
    width = 0.9
    out = np.full(spec.shape, BACKGROUND)
    for t in range(T):
        shift = spec.motion * (t - (T - 1) / 2)
        dy, dx = shift * np.sin(drift_angle), shift * np.cos(drift_angle)
        for p, th, a in zip(points, angles, levels):
            # distance to an infinite line through p + drift, direction th
            ny, nx = np.cos(th), -np.sin(th)
            d = (yy - p[0] - dy) * ny + (xx - p[1] - dx) * nx
            out[t] += a * np.exp(-0.5 * (d / width) ** 2)
    return out


def _static_texture(spec, rng):
    T, H, W = spec.shape
    tex = ndimage.gaussian_filter(rng.normal(size=(H, W)), sigma=2.0, mode="wrap")
    tex = (tex - tex.min()) / max(np.ptp(tex), 1e-12)
    return np.broadcast_to(BACKGROUND + 0.85 * tex, spec.shape).copy()


_SCENE_FN = {
    "moving-disks": _moving_disks,
    "filaments-drift": _filaments,
    "static-texture": _static_texture,
}


def make_phantom(spec):
    """Ground-truth volume (T, H, W) with values in [0, 1], deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    return np.clip(_SCENE_FN[spec.scene](spec, rng), 0.0, 1.0)


def psf_sigma_px(spec):
    """Gaussian widefield approximation: sigma = 0.21 lambda / NA, in pixels."""
    return 0.21 * spec.wavelength_nm / spec.na / spec.pixel_nm


def make_psf(spec):
    """Normalised, radially symmetric Gaussian PSF truncated at 4 sigma."""
    sigma = psf_sigma_px(spec)
    radius = max(1, math.ceil(4.0 * sigma))
    r = np.arange(-radius, radius + 1, dtype=float)
    yy, xx = np.meshgrid(r, r, indexing="ij")
    taps = np.exp(-(yy**2 + xx**2) / (2.0 * sigma**2))
    taps[yy**2 + xx**2 > (4.0 * sigma) ** 2] = 0.0
    return linops.Kernel(taps / taps.sum())


def blur(g, h, boundary="periodic"):
    """Frame-wise convolution of a volume with a spatial kernel."""
    return linops.convolve(as_volume(g, "g"), h, boundary)


def degrade(g, spec, seed=0):
    """m = Poisson(gamma_p (h * g)) + N(0, sigma_g^2), frame-wise blur, no clipping."""
    g = as_volume(g, "g")
    if np.any(g < 0):
        raise ValueError("ground truth intensities must be non-negative")
    rng = np.random.default_rng(seed)
    clean = spec.gamma_p * np.maximum(blur(g, make_psf(spec), spec.boundary), 0.0)
    # inverse-CDF sampling from one uniform field: exact Poisson counts, and
    # datasets that differ only in the optics share their noise realisation
    u = rng.random(clean.shape)
    counts = np.maximum(stats.poisson.ppf(u, clean), 0.0) if spec.gamma_p > 0 else np.zeros_like(clean)
    sigma = 0.02 * spec.gamma_p * float(g.max()) if spec.sigma_g is None else spec.sigma_g
    return counts + sigma * rng.standard_normal(clean.shape)


def snr_db(reference, estimate):
    """10 log10(||ref||^2 / ||ref - est||^2), capped at `SNR_CAP` for exact matches."""
    reference = np.asarray(reference, dtype=np.float64)
    estimate = np.asarray(estimate, dtype=np.float64)
    if reference.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {estimate.shape}")
    signal = float(np.sum(reference**2))
    if signal == 0:
        raise ValueError("SNR is undefined for an all-zero reference")
    error = float(np.sum((reference - estimate) ** 2))
    if error == 0:
        return SNR_CAP
    return min(SNR_CAP, 10.0 * math.log10(signal / error))


def ssim(reference, estimate, data_range=None):
    """Frame-wise SSIM (11 x 11 Gaussian window, sigma 1.5) averaged over time.

    ``data_range`` defaults to the joint value range of both volumes.
    """
    reference = as_volume(reference, "reference")
    estimate = as_volume(estimate, "estimate")
    if reference.shape != estimate.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {estimate.shape}")
    if data_range is None:
        lo = min(reference.min(), estimate.min())
        hi = max(reference.max(), estimate.max())
        data_range = hi - lo if hi > lo else 1.0
    scores = [
        structural_similarity(
            r, e, data_range=data_range, gaussian_weights=True, sigma=1.5, use_sample_covariance=False
        )
        for r, e in zip(reference, estimate)
    ]
    return float(np.mean(scores))


def metrics(reference, estimate):
    return MetricPair(snr_db(reference, estimate), ssim(reference, estimate))
