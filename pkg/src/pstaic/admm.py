"""ADMM solver for the image sub-problem at a fixed weight alpha_s.

The constrained form is min R(w) subject to T f = w, with

    R(w) = 1/2 ||w_m - m||^2 + lam sqrt(2) alpha ||A w_pair||_{1,2}
           + lam (1 - alpha) ||w_group||_{1,2} + indicator_C(w_box)

Each iteration runs the pixel-wise w update, an exact Fourier-domain f update
and the multiplier step. Channel blocks follow `SplitModel`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from . import linops
from .grids import as_volume
from .prox import BoxSet, prox_box, prox_data, prox_group_l2, prox_pair_difference

__all__ = [
    "AdmmConfig",
    "SplitState",
    "InnerResult",
    "DivergenceError",
    "initial_state",
    "regularizer_cost",
    "augmented_lagrangian",
    "w_step",
    "f_step",
    "beta_step",
    "primal_residual",
    "solve_image_subproblem",
]

log = logging.getLogger(__name__)


class DivergenceError(FloatingPointError):
    """Raised when an ADMM iterate stops being finite."""


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    max_iter: int = 50
    tol: float | None = None  # None: 1e-4 * sqrt(pixel count)
    boundary: linops.Boundary = linops.Boundary.PERIODIC

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be non-negative")
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tol must be positive")
        if linops.Boundary(self.boundary) is not linops.Boundary.PERIODIC:
            raise ValueError("the ADMM f update needs periodic boundaries")

    def tolerance(self, shape):
        return self.tol if self.tol is not None else 1e-4 * np.sqrt(np.prod(shape))


@dataclass(frozen=True, eq=False)
class SplitState:
    """f = (g, v), the split variable w, the multiplier beta and T f."""

    f: np.ndarray
    w: np.ndarray
    beta: np.ndarray
    tf: np.ndarray
    k: int = 0


@dataclass(eq=False)
class InnerResult:
    f: np.ndarray
    state: SplitState
    residuals: list = field(default_factory=list)
    converged: bool = False


def initial_state(model, m, f=None):
    """Start from f = (m, 0) (or the given f), w = T f and beta = 0."""
    m = as_volume(m, "m")
    if f is None:
        f = np.stack([m, np.zeros_like(m)])
    tf = model.forward(f)
    return SplitState(f=f, w=tf.copy(), beta=np.zeros_like(tf), tf=tf)


def regularizer_cost(model, w, alpha_s, lam, m, box):
    """R(w, alpha_s); +inf when the box block leaves C."""
    if not box.contains(w[model.box]):
        return np.inf
    data = 0.5 * float(np.sum((w[0] - m) ** 2))
    spatial, temporal = model.regularizer_values(w)
    return data + lam * alpha_s * spatial + lam * (1.0 - alpha_s) * temporal


def augmented_lagrangian(model, state, alpha_s, lam, m, rho, box):
    r = state.tf - state.w
    return (
        regularizer_cost(model, state.w, alpha_s, lam, m, box)
        + float(np.sum(state.beta * r))
        + 0.5 * rho * float(np.sum(r * r))
    )


def w_step(model, state, alpha_s, lam, m, rho, box):
    """Blockwise minimiser of R(w) + (rho/2) ||w - (T f + beta / rho)||^2."""
    x = state.tf + state.beta / rho
    w = np.empty_like(x)
    w[model.data] = prox_data(x[model.data], m, rho)
    w[model.pair] = prox_pair_difference(x[model.pair], np.sqrt(2.0) * lam * alpha_s / rho)
    w[model.group] = prox_group_l2(x[model.group], lam * (1.0 - alpha_s) / rho)
    w[model.box] = prox_box(x[model.box], box)
    return w


def f_step(model, w, beta, rho):
    """Exact minimiser of (1/2) ||T f - y||^2 with y = w - beta / rho.

    T never couples g and v, so the normal equations T^T T f = T^T y are two
    independent diagonal systems in the Fourier domain.
    """
    y = w - beta / rho
    shape = y.shape[1:]
    gram = model.bank.gram(shape)
    # the identity rows put at least 1 on every frequency
    assert gram.min() >= 1.0 - 1e-12, "singular normal operator"
    rhs = model.adjoint(y)
    return fft.irfftn(fft.rfftn(rhs, axes=(1, 2, 3)) / gram, s=shape, axes=(1, 2, 3))


def beta_step(beta, tf, w, rho):
    return beta + rho * (tf - w)


def primal_residual(state):
    return float(np.linalg.norm(state.tf - state.w))


def solve_image_subproblem(model, start, alpha_s, lam, m, box=BoxSet(), cfg=AdmmConfig()):
    """Run ADMM from ``start`` (a SplitState, or a pair field to initialise from).

    Stops after ``cfg.max_iter`` iterations or once ||T f - w|| drops to the
    tolerance. Returns the final f together with the state for warm starts.
    """
    m = as_volume(m, "m")
    state = start if isinstance(start, SplitState) else initial_state(model, m, np.asarray(start))
    rho = cfg.rho
    tol = cfg.tolerance(m.shape)
    residuals = []
    converged = False
    for k in range(cfg.max_iter):
        w = w_step(model, state, alpha_s, lam, m, rho, box)
        f = f_step(model, w, state.beta, rho)
        tf = model.forward(f)
        # T f - w feeds both the multiplier step and the stopping test
        r = tf - w
        res = float(np.linalg.norm(r))
        r *= rho
        r += state.beta
        state = SplitState(f=f, w=w, beta=r, tf=tf, k=state.k + 1)
        if not np.isfinite(res) or not np.all(np.isfinite(f)):
            raise DivergenceError(f"non-finite ADMM iterate at inner iteration {k + 1} (rho={rho})")
        residuals.append(res)
        if res <= tol:
            converged = True
            break
    log.debug("ADMM stopped after %d iterations, residual %.3g", len(residuals), residuals[-1] if residuals else np.nan)
    return InnerResult(f=state.f, state=state, residuals=residuals, converged=converged)
