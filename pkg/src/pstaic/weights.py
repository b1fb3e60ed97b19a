"""The scalar weight sub-problem.

With the image fixed, the cost in alpha reduces to

    alpha * C1 + (1 - alpha) * C2 - tau * log(alpha * (1 - alpha))

which is strictly convex on (0, 1) and has a closed-form minimiser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linops

__all__ = [
    "WeightCoeffs",
    "ConstantTau",
    "MotionAdaptiveTau",
    "barrier",
    "weight_cost",
    "weight_cost_derivative",
    "solve_weight",
    "compute_coeffs",
]


@dataclass(frozen=True)
class WeightCoeffs:
    c1: float
    c2: float
    tau: float

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("C1 and C2 must be non-negative")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def mu(self):
        return self.c1 - self.c2

    @property
    def zeta(self):
        return math.inf if self.mu == 0 else 2.0 * self.tau / abs(self.mu)

    def swapped(self):
        return WeightCoeffs(self.c2, self.c1, self.tau)


def barrier(alpha, tau):
    """-tau log(alpha (1 - alpha)) on (0, 1), +inf elsewhere."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if not 0.0 < alpha < 1.0:
        return math.inf
    return -tau * math.log(alpha * (1.0 - alpha))


def weight_cost(alpha, c):
    b = barrier(alpha, c.tau)
    if math.isinf(b):
        return math.inf
    return alpha * c.c1 + (1.0 - alpha) * c.c2 + b


def weight_cost_derivative(alpha, c):
    return c.mu - c.tau / alpha + c.tau / (1.0 - alpha)


def solve_weight(c):
    """Unique minimiser of `weight_cost` in (0, 1).

    The textbook form 0.5 (1 - sign(mu) (sqrt(4 tau^2 / mu^2 + 1) - 2 tau / |mu|))
    cancels catastrophically for |mu| << tau; the rationalised form below is
    algebraically identical and also covers mu = 0.
    """
    mu, tau = c.mu, c.tau
    return 0.5 * (1.0 - mu / (math.hypot(2.0 * tau, mu) + 2.0 * tau))


@dataclass(frozen=True)
class ConstantTau:
    """Fixed barrier strength.

    With ``per_pixel`` (the default) ``value`` is given per pixel and per unit
    lambda, and the absolute strength is ``value * lam * n_pixels``. C1 and C2
    are sums over all pixels scaled by lambda, so this keeps the weight
    balance independent of grid size and regularisation strength.
    """

    value: float = 10.0
    per_pixel: bool = True

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError("tau must be positive")

    def scale(self, f, lam):
        return lam * np.asarray(f)[0].size if self.per_pixel else 1.0

    def __call__(self, f, lam=1.0):
        return self.value * self.scale(f, lam)


@dataclass(frozen=True)
class MotionAdaptiveTau(ConstantTau):
    """``value`` times the mean of exp(-(d_tt * g)^2) over the current estimate.

    Regions with temporal change pull the factor below 1 and static regions
    leave it at 1; the mean turns the field into the scalar the closed form
    needs.
    """

    def __call__(self, f, lam=1.0):
        g = np.asarray(f)[0]
        base = self.value * self.scale(f, lam)
        if g.shape[0] < 3:
            return base
        dtt = linops.convolve(g, linops.second_derivative("t"))
        factor = float(np.mean(np.exp(-(dtt**2))))
        # exp underflow on violent motion would give tau = 0
        return base * max(factor, np.finfo(float).tiny)


def compute_coeffs(f, lam, model, tau):
    """C1, C2 of the weight cost at the pair field ``f``.

    C1 = lam * sum sqrt(2) ||A (pair block)||, C2 = lam * sum ||group block||.
    """
    stack = model.forward(f)
    spatial, temporal = model.regularizer_values(stack)
    return WeightCoeffs(lam * spatial, lam * temporal, tau)
