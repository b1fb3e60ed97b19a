"""Grid containers and mixed-norm kernels.

Arrays are plain numpy arrays with a fixed axis convention:

    frame        (H, W)
    volume       (T, H, W)          one frame per time step
    pair field   (2, T, H, W)       f = (g, v)
    stack field  (C, T, H, W)       filter-bank outputs, ADMM splitting variables

Vector-valued fields are channels-first: the per-pixel vector lives on axis 0.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "as_volume",
    "as_pair",
    "frame",
    "mixed_norm",
    "pixel_norms",
    "NORM_KINDS",
]

NORM_KINDS = ("l12", "kappa", "inv_kappa", "fro2")


def as_volume(values, name="volume"):
    """Return ``values`` as a float64 (T, H, W) array, checking it is finite.

    A 2D frame is promoted to a single-frame volume.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError(f"{name} must be 2D or 3D, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"{name} has an empty axis: {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_pair(g, v=None):
    """Stack an image ``g`` and its decomposition component ``v`` into a pair field."""
    g = as_volume(g, "g")
    v = np.zeros_like(g) if v is None else as_volume(v, "v")
    if g.shape != v.shape:
        raise ValueError(f"g and v shapes differ: {g.shape} vs {v.shape}")
    return np.stack([g, v])


def frame(volume, i):
    """Frame ``i`` of a volume, counted from 1 as in the ``g_i`` notation."""
    volume = np.asarray(volume)
    n_frames = volume.shape[0]
    if not 1 <= i <= n_frames:
        raise IndexError(f"frame index {i} outside 1..{n_frames}")
    return volume[i - 1].copy()


def pixel_norms(v, kind="l12", kappa=1.0):
    """Per-pixel norm of a channels-first vector field (the summand of `mixed_norm`)."""
    v = np.asarray(v, dtype=np.float64)
    if kind in ("kappa", "inv_kappa"):
        if v.shape[0] != 3:
            raise ValueError(f"kappa norms need 3-channel fields, got {v.shape[0]} channels")
        if not kappa > 0:
            raise ValueError("kappa must be positive")
        k2 = kappa * kappa
        if kind == "kappa":
            return np.sqrt(k2 * (v[0] ** 2 + v[1] ** 2) + v[2] ** 2)
        return np.sqrt(v[0] ** 2 + v[1] ** 2 + k2 * v[2] ** 2)
    if kind == "l12":
        return np.sqrt(np.sum(v * v, axis=0))
    if kind == "fro2":
        return np.sum(v * v, axis=0)
    raise ValueError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def mixed_norm(v, kind="l12", kappa=1.0):
    """Sum over pixels of per-pixel vector norms.

    Parameters
    ----------
    v : array_like
        Channels-first vector field, shape (c, ...).
    kind : {"l12", "kappa", "inv_kappa", "fro2"}
        ``l12`` sums Euclidean norms. ``kappa`` uses
        sqrt(kappa^2 (y1^2 + y2^2) + y3^2) and ``inv_kappa`` uses
        sqrt(y1^2 + y2^2 + kappa^2 y3^2); both need exactly 3 channels.
        ``fro2`` is the plain sum of squares.
    kappa : float
        Weight for the kappa kinds.
    """
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError("field contains non-finite values")
    return float(np.sum(pixel_norms(v, kind, kappa)))
