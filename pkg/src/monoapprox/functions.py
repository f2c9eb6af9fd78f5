"""Monotone test-function families, a monotonicity checker, and oracle helpers.

All oracles are callables mapping a point of ``[0,1]^d`` to a value in
``[-1, 1]``.  Families constructed here are immutable after construction and
safe to share across threads.  Each oracle also exposes a ``batch`` method
taking an ``(n, d)`` array for vectorized evaluation; plain callables without
``batch`` are accepted everywhere and evaluated pointwise.

Sign convention: ``sgn(0) = +1`` throughout, so sign-valued oracles never
return zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, FrozenSet

import numpy as np

from .budget import check_budget
from .haar_basis import cell_of_point


def sign_plus(v: float) -> float:
    """Sign with the convention sgn(0) = +1."""
    return 1.0 if v >= 0.0 else -1.0


def eval_batch(oracle, points: np.ndarray) -> np.ndarray:
    """Evaluate an oracle on an (n, d) array, using its batch path if present."""
    batch = getattr(oracle, "batch", None)
    if batch is not None:
        return np.asarray(batch(points), dtype=float)
    return np.fromiter((oracle(p) for p in points), dtype=float, count=len(points))


@dataclass(frozen=True)
class Boxbslash:
    """Diagonal split function: sign of ``sum_j x_j - d/2``.

    Sign-valued and monotone; the split surface passes through the center of
    the cube, so half the volume maps to each sign.
    """

    d: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be positive")

    def __call__(self, x) -> float:
        return sign_plus(math.fsum(x) - self.d / 2.0)

    def batch(self, points: np.ndarray) -> np.ndarray:
        s = np.asarray(points, dtype=float).sum(axis=1) - self.d / 2.0
        return np.where(s >= 0.0, 1.0, -1.0)


def boxbslash(d: int) -> Boxbslash:
    """Sign-valued monotone oracle ``sgn(sum_j x_j - d/2)`` with sgn(0) = +1."""
    return Boxbslash(d)


@dataclass(frozen=True)
class StepFamily:
    """Piecewise-constant monotone function on the uniform m-grid.

    The cube is split into ``m**d`` subcubes indexed by ``i`` in
    ``{0..m-1}^d``; on subcube ``i`` the value is

        2 * (|i|_1 + delta_i) / (d*(m-1) + 1) - 1,

    where ``delta_i`` is a 0/1 perturbation bit per subcube.  Every bit
    assignment yields a monotone function: moving one step up any coordinate
    raises ``|i|_1`` by one, which dominates any change in ``delta``.
    """

    d: int
    m: int
    delta: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.d < 1 or self.m < 1:
            raise ValueError("d and m must be positive")
        delta = np.asarray(self.delta)
        if delta.shape != (self.m,) * self.d:
            raise ValueError(
                f"delta must cover all {self.m}**{self.d} cells, got shape {delta.shape}"
            )
        if not np.isin(delta, (0, 1)).all():
            raise ValueError("delta entries must be 0 or 1")
        arr = np.ascontiguousarray(delta, dtype=np.int64)
        arr.flags.writeable = False
        object.__setattr__(self, "delta", arr)

    @property
    def denominator(self) -> int:
        return self.d * (self.m - 1) + 1

    def value_on_cell(self, cell: tuple[int, ...]) -> float:
        return 2.0 * (sum(cell) + int(self.delta[cell])) / self.denominator - 1.0

    def __call__(self, x) -> float:
        cell = tuple(min(int(xj * self.m), self.m - 1) for xj in x)
        return self.value_on_cell(cell)

    def batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        cells = np.minimum((pts * self.m).astype(np.int64), self.m - 1)
        level = cells.sum(axis=1) + self.delta[tuple(cells.T)]
        return 2.0 * level / self.denominator - 1.0


def random_delta(d: int, m: int, seed) -> np.ndarray:
    """I.i.d. fair perturbation bits for every subcube of the m-grid."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(m,) * d)


def step_function(d: int, m: int, delta) -> StepFamily:
    """Monotone piecewise-constant oracle for the given perturbation bits."""
    return StepFamily(d, m, np.asarray(delta))


def _weight_t_masks(d: int, t: int):
    for combo in combinations(range(d), t):
        yield sum(1 << j for j in combo)


@dataclass(frozen=True)
class LevelSetFunction:
    """Sign-valued monotone function determined by a random up-set seed.

    Points of the cube are identified with Boolean vertices through the half
    split of every coordinate (coordinate j maps to bit ``[x_j >= 1/2]``,
    with ``x_j = 1`` in the upper half).  On the Boolean cube the value is
    -1 exactly when the vertex weight is at most ``b`` and no member of ``U``
    lies below the vertex; otherwise +1.  Members of ``U`` all have weight
    ``t``, and ``t <= b <= d``.

    ``U`` is stored as a hash set of bit-packed vertices.  A witness query
    scans whichever enumeration is smaller: the members of ``U`` or the
    weight-t subvectors of the query vertex.
    """

    d: int
    t: int
    b: int
    members: FrozenSet[int]

    def __post_init__(self) -> None:
        if not 1 <= self.t <= self.b <= self.d:
            raise ValueError(f"need 1 <= t <= b <= d, got t={self.t} b={self.b} d={self.d}")
        for u in self.members:
            if u < 0 or u >= (1 << self.d) or u.bit_count() != self.t:
                raise ValueError(f"member {u:b} does not have weight {self.t}")

    def _has_witness(self, mask: int, weight: int) -> bool:
        if weight < self.t:
            return False
        n_sub = math.comb(weight, self.t)
        if len(self.members) <= n_sub:
            return any((mask & u) == u for u in self.members)
        bits = [j for j in range(self.d) if mask >> j & 1]
        for combo in combinations(bits, self.t):
            if sum(1 << j for j in combo) in self.members:
                return True
        return False

    def value_on_vertex(self, mask: int) -> float:
        weight = mask.bit_count()
        if weight > self.b:
            return 1.0
        return 1.0 if self._has_witness(mask, weight) else -1.0

    def __call__(self, x) -> float:
        mask = 0
        for j, xj in enumerate(x):
            if cell_of_point(xj, 1):
                mask |= 1 << j
        return self.value_on_vertex(mask)

    def batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        bits = pts >= 0.5
        weights = bits.sum(axis=1)
        masks = bits @ (1 << np.arange(self.d, dtype=np.int64))
        covered = np.zeros(len(pts), dtype=bool)
        for u in self.members:
            covered |= (masks & u) == u
        return np.where((weights > self.b) | covered, 1.0, -1.0)


def level_set_function(d: int, t: int, b: int, U) -> LevelSetFunction:
    """Monotone sign-valued oracle from a set ``U`` of weight-t Boolean points.

    ``U`` may contain bit masks or 0/1 tuples.
    """
    members = set()
    for u in U:
        if isinstance(u, int):
            members.add(u)
        else:
            members.add(sum(1 << j for j, bit in enumerate(u) if bit))
    return LevelSetFunction(d, t, b, frozenset(members))


def sample_U(d: int, t: int, p: float, seed) -> frozenset[int]:
    """Draw each weight-t Boolean point into U independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    return frozenset(u for u in _weight_t_masks(d, t) if rng.random() < p)


class _Thresholded:
    def __init__(self, oracle, t: float):
        self.oracle = oracle
        self.t = t

    def __call__(self, x) -> float:
        return sign_plus(self.oracle(x) - self.t)

    def batch(self, points: np.ndarray) -> np.ndarray:
        vals = eval_batch(self.oracle, points)
        return np.where(vals >= self.t, 1.0, -1.0)


def threshold(oracle, t: float) -> Callable:
    """Sign-valued cut of an oracle: ``x -> sgn(oracle(x) - t)``, sgn(0) = +1.

    Monotone whenever the input oracle is, and pointwise nonincreasing in t.
    """
    return _Thresholded(oracle, t)


@dataclass(frozen=True)
class Affine:
    """Smooth monotone ramp ``(2/d) * sum_j x_j - 1``, spanning [-1, 1]."""

    d: int

    def __call__(self, x) -> float:
        return 2.0 * math.fsum(x) / self.d - 1.0

    def batch(self, points: np.ndarray) -> np.ndarray:
        return 2.0 * np.asarray(points, dtype=float).sum(axis=1) / self.d - 1.0


class _Snapped:
    def __init__(self, oracle, d: int, r: int):
        self.oracle = oracle
        self.d = d
        self.r = r

    def _mid(self, x) -> list[float]:
        scale = 1 << self.r
        return [(cell_of_point(xj, self.r) + 0.5) / scale for xj in x]

    def __call__(self, x) -> float:
        return self.oracle(self._mid(x))

    def batch(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        scale = 1 << self.r
        cells = np.minimum((pts * scale).astype(np.int64), scale - 1)
        return eval_batch(self.oracle, (cells + 0.5) / scale)


def snap_to_grid(oracle, d: int, r: int):
    """Piecewise-constant version of an oracle on the resolution-r dyadic grid.

    Every point is evaluated at the midpoint of its cell.  Monotonicity is
    preserved because cell midpoints are ordered like the cells themselves.
    """
    if r < 0:
        raise ValueError("r must be nonnegative")
    return _Snapped(oracle, d, r)


def is_monotone_on_grid(oracle, d: int, resolution: int, budget: int | None = None) -> bool:
    """Check coordinatewise monotonicity on the midpoint lattice.

    Evaluates the oracle at the ``resolution**d`` cell midpoints and verifies
    that every coordinate-successor pair is nondecreasing.  True iff no
    violation is found.
    """
    if resolution < 1:
        raise ValueError("resolution must be positive")
    check_budget(resolution**d, budget, what="lattice points")
    mids = (np.arange(resolution) + 0.5) / resolution
    mesh = np.meshgrid(*([mids] * d), indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    values = eval_batch(oracle, points).reshape((resolution,) * d)
    for axis in range(d):
        if np.any(np.diff(values, axis=axis) < 0):
            return False
    return True


def family_from_spec(spec: str, d: int, seed) -> Callable:
    """Build an oracle from a CLI family string.

    Formats: ``boxbslash``; ``affine``; ``step:m=4``;
    ``levelset:t=2,b=4,p=0.3``.  Random family members are drawn
    deterministically from ``seed``.
    """
    name, _, argstr = spec.partition(":")
    args: dict[str, str] = {}
    if argstr:
        for item in argstr.split(","):
            key, _, value = item.partition("=")
            if not value:
                raise ValueError(f"malformed family argument {item!r}")
            args[key.strip()] = value.strip()
    if name == "boxbslash":
        return boxbslash(d)
    if name == "affine":
        return Affine(d)
    if name == "step":
        m = int(args.pop("m", "2"))
        if args:
            raise ValueError(f"unknown step arguments {sorted(args)}")
        return step_function(d, m, random_delta(d, m, seed))
    if name == "levelset":
        t = int(args.pop("t", "1"))
        b = int(args.pop("b", str(d)))
        p = float(args.pop("p", "0.5"))
        if args:
            raise ValueError(f"unknown levelset arguments {sorted(args)}")
        return level_set_function(d, t, b, sample_U(d, t, p, seed))
    raise ValueError(f"unknown family {name!r}")
