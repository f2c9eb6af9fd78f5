"""Deterministic grid approximation of monotone functions.

The cube is split into ``m**d`` subcubes; the oracle is evaluated at the
``(m-1)**d`` interior lattice points ``i/m``.  On each subcube the output is
the midpoint of what is known about the function at the subcube's lower and
upper corners, where corners on the domain boundary are assumed to take the
extreme values (-1 below, +1 above) without spending evaluations.  For any
monotone input the L1 error is at most ``d/m``: subcubes group into at most
``d * m**(d-1)`` corner-touching diagonals and monotonicity confines the
error along each diagonal to a single subcube volume.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .budget import check_budget
from .functions import eval_batch


@dataclass(frozen=True)
class GridModel:
    """Fitted deterministic approximant: interior lattice values on the m-grid."""

    d: int
    m: int
    lattice_values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.m < 2 or self.d < 1:
            raise ValueError("need m >= 2 and d >= 1")
        values = np.asarray(self.lattice_values, dtype=float)
        if values.shape != (self.m - 1,) * self.d:
            raise ValueError(
                f"lattice must have shape {(self.m - 1,) * self.d}, got {values.shape}"
            )
        if values.size and (np.abs(values).max() > 1.0 or not np.isfinite(values).all()):
            raise ValueError("lattice values must lie in [-1, 1]")
        values = np.ascontiguousarray(values)
        values.flags.writeable = False
        object.__setattr__(self, "lattice_values", values)


def fit_grid(oracle, d: int, m: int, budget: int | None = None) -> GridModel:
    """Evaluate the oracle at all interior lattice points i/m, i in {1..m-1}^d.

    A non-monotone value pattern triggers a warning (the approximant is still
    well defined) rather than a rejection.
    """
    if m < 2 or d < 1:
        raise ValueError("need m >= 2 and d >= 1")
    check_budget((m - 1) ** d, budget, what="lattice points")
    coords = np.arange(1, m) / m
    mesh = np.meshgrid(*([coords] * d), indexing="ij")
    points = np.stack([c.ravel() for c in mesh], axis=-1)
    values = eval_batch(oracle, points).reshape((m - 1,) * d)
    for axis in range(d):
        if np.any(np.diff(values, axis=axis) < 0):
            warnings.warn(
                "lattice values are not monotone along every coordinate; "
                "the d/m error guarantee does not apply",
                stacklevel=2,
            )
            break
    return GridModel(d, m, values)


def eval_grid(model: GridModel, x) -> float:
    """Midpoint of the corner knowledge for the subcube containing ``x``.

    Lower-corner knowledge is the stored value, or -1 when any coordinate of
    the corner lies on the lower boundary; upper-corner knowledge is the
    stored value, or +1 when any coordinate lies on the upper boundary.
    """
    m, d = model.m, model.d
    if len(x) != d:
        raise ValueError(f"point has {len(x)} coordinates, model has d={d}")
    cell = [min(int(float(xj) * m), m - 1) for xj in x]
    if any(c == 0 for c in cell):
        lower = -1.0
    else:
        lower = float(model.lattice_values[tuple(c - 1 for c in cell)])
    if any(c == m - 1 for c in cell):
        upper = 1.0
    else:
        upper = float(model.lattice_values[tuple(cell)])
    return 0.5 * (lower + upper)


def grid_error_bound(d: int, m: int) -> float:
    """Worst-case L1 error guarantee d/m for monotone inputs."""
    if m < 1 or d < 1:
        raise ValueError("need positive d and m")
    return d / m
