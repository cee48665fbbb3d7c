"""Shared analytic test configurations.

Three metric families on the n=2 torus, used across the test suite and the
example configs:

* ``f0``: the flat metric (Kahler).
* ``f1``: ``exp(u) * identity`` with ``u = (1/10) cos(2 pi x^1)`` --
  conformally flat but not Gauduchon; every derived quantity has a closed
  form, which makes it the calibration family.
* ``f2``: identity plus a small generic Hermitian trigonometric perturbation
  -- non-Kahler with no special structure.
"""

from __future__ import annotations

import numpy as np

from .grid import TorusGrid
from .metric import MetricField, MetricSpec, MetricTerm, build_metric

__all__ = [
    "f0_spec", "f1_spec", "f2_spec",
    "f0_metric", "f1_metric", "f2_metric",
    "f1_exponent",
]

F1_AMPLITUDE = 0.1
F2_EPSILON = 1.0 / 20.0


def f0_spec(n: int = 2) -> MetricSpec:
    """Flat Kahler metric."""
    return MetricSpec(n=n)


def f1_spec(n: int = 2, amplitude: float = F1_AMPLITUDE) -> MetricSpec:
    """exp(u) * identity with u = amplitude * cos(2 pi x^1)."""
    wave = (1,) + (0,) * (2 * n - 1)
    return MetricSpec(n=n, conformal=((wave, amplitude / 2.0),))


def f2_spec(n: int = 2, eps: float = F2_EPSILON) -> MetricSpec:
    """identity + eps * (P + P^H) with P_11 = e^{2 pi i x^1},
    P_12 = (1/2) e^{2 pi i y^2}."""
    if n != 2:
        raise ValueError("the f2 family is defined for n = 2")
    terms = (
        MetricTerm(entry=(0, 0), wave=(1, 0, 0, 0), coeff=eps),
        MetricTerm(entry=(0, 1), wave=(0, 0, 0, 1), coeff=eps / 2.0),
    )
    return MetricSpec(n=n, terms=terms)


def f0_metric(grid: TorusGrid) -> MetricField:
    return build_metric(f0_spec(grid.n), grid)


def f1_metric(grid: TorusGrid, amplitude: float = F1_AMPLITUDE) -> MetricField:
    return build_metric(f1_spec(grid.n, amplitude), grid)


def f2_metric(grid: TorusGrid, eps: float = F2_EPSILON) -> MetricField:
    return build_metric(f2_spec(grid.n, eps), grid)


def f1_exponent(grid: TorusGrid, amplitude: float = F1_AMPLITUDE) -> np.ndarray:
    """The conformal exponent u of the f1 family as a grid array."""
    return amplitude * np.cos(2 * np.pi * grid.coordinate(0)) * np.ones(grid.shape)
