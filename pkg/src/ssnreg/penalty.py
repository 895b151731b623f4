"""MCP and SCAD penalties, their thresholding operators and Newton derivatives.

All functions accept scalars or arrays and are evaluated elementwise.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Family(str, Enum):
    MCP = "mcp"
    SCAD = "scad"


DEFAULT_GAMMA = {Family.MCP: 2.7, Family.SCAD: 3.7}


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family with level ``lam`` and concavity ``gamma``."""

    family: Family
    lam: float
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not np.isfinite(self.lam) or self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        bound = 1.0 if self.family is Family.MCP else 2.0
        if not self.gamma > bound:
            raise ValueError(
                f"gamma must exceed {bound:g} for {self.family.value}, got {self.gamma}"
            )

    @classmethod
    def make(cls, family, lam, gamma=None):
        family = Family(family)
        return cls(family, float(lam), float(DEFAULT_GAMMA[family] if gamma is None else gamma))

    def with_lambda(self, lam):
        return PenaltySpec(self.family, float(lam), self.gamma)


def _out(x, like):
    return x.item() if np.ndim(like) == 0 else x


def penalty_value(t, spec):
    """p(|t|; lam, gamma) from the closed-form antiderivative."""
    a = np.abs(np.asarray(t, dtype=float))
    lam, g = spec.lam, spec.gamma
    if spec.family is Family.MCP:
        val = np.where(a <= g * lam, lam * a - a * a / (2 * g), 0.5 * g * lam * lam)
    else:
        mid = (2 * g * lam * a - a * a - lam * lam) / (2 * (g - 1))
        val = np.where(
            a <= lam, lam * a, np.where(a <= g * lam, mid, 0.5 * lam * lam * (g + 1))
        )
    return _out(val, t)


def penalty_derivative(t, spec):
    t_arr = np.asarray(t, dtype=float)
    a = np.abs(t_arr)
    lam, g = spec.lam, spec.gamma
    if spec.family is Family.MCP:
        mag = np.maximum(lam - a / g, 0.0)
    else:
        mag = np.where(a <= lam, lam, np.maximum(g * lam - a, 0.0) / (g - 1))
    return _out(mag * np.sign(t_arr), t)


def soft_threshold(t, lam):
    t_arr = np.asarray(t, dtype=float)
    return _out(np.maximum(np.abs(t_arr) - lam, 0.0) * np.sign(t_arr), t)


def threshold(t, spec):
    """Minimizer of 0.5*(z - t)**2 + p(z; lam, gamma) over z.

    Computed on |t| and signed afterwards, so the map is exactly odd.
    """
    t_arr = np.asarray(t, dtype=float)
    a = np.abs(t_arr)
    lam, g = spec.lam, spec.gamma
    if spec.family is Family.MCP:
        mag = np.where(a <= g * lam, np.maximum(a - lam, 0.0) / (1 - 1 / g), a)
    else:
        shrunk = np.maximum(a - lam * g / (g - 1), 0.0) / (1 - 1 / (g - 1))
        mag = np.where(a <= 2 * lam, np.maximum(a - lam, 0.0), np.where(a <= g * lam, shrunk, a))
    return _out(mag * np.sign(t_arr), t)


def newton_derivative(t, spec):
    """Piecewise-constant Newton derivative of :func:`threshold`.

    Breakpoints follow the active-set conventions used by the solvers:
    ``|t| == lam`` counts as inactive (0), ``|t| == 2*lam`` (SCAD) takes the
    middle slope and ``|t| == gamma*lam`` takes 1.
    """
    a = np.abs(np.asarray(t, dtype=float))
    lam, g = spec.lam, spec.gamma
    if spec.family is Family.MCP:
        val = np.where(a <= lam, 0.0, np.where(a < g * lam, g / (g - 1), 1.0))
    else:
        val = np.where(
            a <= lam,
            0.0,
            np.where(a < 2 * lam, 1.0, np.where(a < g * lam, (g - 1) / (g - 2), 1.0)),
        )
    return _out(val, t)


def threshold_vector(z, spec):
    z = np.asarray(z, dtype=float)
    if z.ndim != 1:
        raise ValueError("expected a 1-d vector")
    return threshold(z, spec)


def objective(X, y, beta, spec):
    """Penalized least squares 0.5*||X beta - y||^2 + sum_i p(beta_i)."""
    r = X @ beta - y
    return 0.5 * float(r @ r) + float(np.sum(penalty_value(beta, spec)))
