"""Closed-form pixel-wise solutions of the w sub-problems.

All operators are vectorised: vector arguments are channels-first, so a
(9, T, H, W) stack is shrunk pixel by pixel along axis 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoxSet",
    "prox_data",
    "prox_box",
    "prox_group_l2",
    "prox_pair_difference",
    "prox_As",
]


@dataclass(frozen=True)
class BoxSet:
    """Pixel-value bounds [lower, upper]; infinite bounds are allowed."""

    lower: float = 0.0
    upper: float = np.inf

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty box: lower={self.lower} > upper={self.upper}")

    def contains(self, x):
        x = np.asarray(x)
        return bool(np.all((x >= self.lower) & (x <= self.upper)))

    def project(self, x):
        return np.clip(x, self.lower, self.upper)


def prox_data(x_m, m, rho):
    """Minimiser of (rho/2)(x_m - z)^2 + (1/2)(z - m)^2."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return (rho * np.asarray(x_m, dtype=np.float64) + m) / (rho + 1.0)


def prox_box(x_b, box):
    return box.project(np.asarray(x_b, dtype=np.float64))


def _shrink_factor(norms, threshold):
    # max(0, 1 - threshold / norm) with an exact 0 where norm == 0
    safe = np.where(norms > 0, norms, 1.0)
    return np.where(norms > threshold, 1.0 - threshold / safe, 0.0)


def prox_group_l2(x, threshold, axis=0):
    """Group soft thresholding: prox of ``threshold * ||.||_2`` along ``axis``.

    Vectors with norm at or below ``threshold`` map to exactly zero.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    if threshold == 0:
        return x.copy()
    norms = np.sqrt(np.sum(x * x, axis=axis, keepdims=True))
    return _shrink_factor(norms, threshold) * x


def prox_pair_difference(y, threshold, axis=0):
    """prox of ``threshold * ||A z||_2`` with A = [I, -I] / sqrt(2) on 2n-vectors.

    A has orthonormal rows, so A^T A is an orthogonal projector. In the
    eigenbasis P the first n coordinates (A z, the range of A^T) are
    group-shrunk and the last n (the null space of A) pass through. For this
    P that reduces to: keep the pair mean, shrink the half difference.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    y = np.moveaxis(np.asarray(y, dtype=np.float64), axis, 0)
    if y.shape[0] % 2:
        raise ValueError(f"need an even number of components, got {y.shape[0]}")
    n = y.shape[0] // 2
    mean = 0.5 * (y[:n] + y[n:])
    half = 0.5 * (y[:n] - y[n:])
    # ||A y|| = sqrt(2) ||half||
    norms = np.sqrt(2.0 * np.sum(half * half, axis=0, keepdims=True))
    half *= _shrink_factor(norms, threshold)
    return np.moveaxis(np.concatenate([mean + half, mean - half]), 0, axis)


def prox_As(y, lam, alpha_s, rho, axis=0):
    """Minimiser of (rho/2)||y - z||^2 + sqrt(2) lam alpha_s ||A_s z||_2 on 10-vectors."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    y = np.asarray(y, dtype=np.float64)
    if y.shape[axis] != 10:
        raise ValueError(f"A_s acts on 10-vectors, got {y.shape[axis]} components")
    return prox_pair_difference(y, np.sqrt(2.0) * lam * alpha_s / rho, axis=axis)
