"""Outer alternation between the weight update and the image sub-problem."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .admm import AdmmConfig, initial_state, solve_image_subproblem
from .grids import as_volume
from .models import pictv_model, pstaic_model
from .prox import BoxSet
from .weights import ConstantTau, barrier, compute_coeffs, solve_weight

__all__ = [
    "RestoreConfig",
    "RestoreReport",
    "ALGORITHMS",
    "evaluate_cost",
    "restore",
    "pstaic_restore",
    "pictv_restore",
    "staic_restore",
]

log = logging.getLogger(__name__)

ALGORITHMS = ("pstaic", "pictv", "staic")


@dataclass(frozen=True)
class RestoreConfig:
    """Parameters of one restoration run.

    ``algorithm`` picks the regulariser and whether alpha_s is estimated:
    ``pstaic`` and ``pictv`` estimate it, ``staic`` keeps ``alpha_fixed``.
    ``kappa1`` and ``kappa2`` only matter for ``pictv``.
    """

    lam: float = 0.05
    tau: object = ConstantTau()
    admm: AdmmConfig = AdmmConfig()
    n_outer: int = 10
    box: BoxSet = BoxSet()
    algorithm: str = "pstaic"
    alpha_fixed: float = 0.5
    kappa1: float = 1.0
    kappa2: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if self.n_outer < 1:
            raise ValueError("n_outer must be at least 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 < self.alpha_fixed < 1.0:
            raise ValueError("alpha_fixed must lie in (0, 1)")
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise ValueError("kappa values must be positive")

    def model(self, h):
        if self.algorithm == "pictv":
            return pictv_model(h, self.kappa1, self.kappa2)
        return pstaic_model(h)


@dataclass(eq=False)
class RestoreReport:
    f: np.ndarray
    alphas: list = field(default_factory=list)
    costs: list = field(default_factory=list)
    costs_before: list = field(default_factory=list)
    c1: list = field(default_factory=list)
    c2: list = field(default_factory=list)
    taus: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    wall_time: float = 0.0
    algorithm: str = "pstaic"

    @property
    def g(self):
        return self.f[0]

    @property
    def v(self):
        return self.f[1]

    @property
    def slack(self):
        """Per-step increase of the cost over the image update (0 when it decreased)."""
        return [max(0.0, a - b) for a, b in zip(self.costs, self.costs_before)]


def evaluate_cost(f, alpha_s, lam, m, h, box, tau, model=None):
    """Full objective H(f, alpha_s): data term, weighted regularisers, box and barrier."""
    f = np.asarray(f, dtype=np.float64)
    m = as_volume(m, "m")
    model = pstaic_model(h) if model is None else model
    if not box.contains(f):
        return math.inf
    b = barrier(alpha_s, tau)
    if math.isinf(b):
        return math.inf
    stack = model.forward(f)
    data = 0.5 * float(np.sum((stack[0] - m) ** 2))
    spatial, temporal = model.regularizer_values(stack)
    return data + lam * (alpha_s * spatial + (1.0 - alpha_s) * temporal) + b


def restore(m, h, cfg):
    """Alternate the closed-form weight update with the ADMM image solve."""
    m = as_volume(m, "m")
    model = cfg.model(h)
    start = time.perf_counter()
    f = np.stack([cfg.box.project(m), np.zeros_like(m)])
    state = initial_state(model, m, f)
    report = RestoreReport(f=f, algorithm=cfg.algorithm)
    for ell in range(cfg.n_outer):
        tau = float(cfg.tau(f, cfg.lam))
        coeffs = compute_coeffs(f, cfg.lam, model, tau)
        alpha = cfg.alpha_fixed if cfg.algorithm == "staic" else solve_weight(coeffs)
        report.costs_before.append(evaluate_cost(f, alpha, cfg.lam, m, h, cfg.box, tau, model))
        inner = solve_image_subproblem(model, state, alpha, cfg.lam, m, cfg.box, cfg.admm)
        state = inner.state
        f = cfg.box.project(inner.f)
        report.alphas.append(alpha)
        report.c1.append(coeffs.c1)
        report.c2.append(coeffs.c2)
        report.taus.append(tau)
        report.residuals.append(inner.residuals)
        report.costs.append(evaluate_cost(f, alpha, cfg.lam, m, h, cfg.box, tau, model))
        log.info("%s outer %d: alpha=%.4f cost=%.6g inner=%d", cfg.algorithm, ell + 1, alpha, report.costs[-1], len(inner.residuals))
    report.f = f
    report.wall_time = time.perf_counter() - start
    return report


def _require(cfg, algorithm):
    if cfg.algorithm != algorithm:
        raise ValueError(f"config is for {cfg.algorithm!r}, expected {algorithm!r}")


def pstaic_restore(m, h, cfg):
    _require(cfg, "pstaic")
    return restore(m, h, cfg)


def pictv_restore(m, h, cfg):
    _require(cfg, "pictv")
    return restore(m, h, cfg)


def staic_restore(m, h, cfg):
    """Fixed-weight run: the weight step is skipped and alpha_fixed is used throughout."""
    _require(cfg, "staic")
    return restore(m, h, cfg)
