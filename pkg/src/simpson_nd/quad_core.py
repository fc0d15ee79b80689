"""Simpson-type quadrature over n-dimensional axis-aligned cuboids.

The single-cell rule samples an integrand on the 3^n lattice offsets
{-1, 0, 1}^n around the cell center and weights each sample by
4^(number of zero offsets), scaled once by prod(half_widths) / 3^n.
The composite rule tiles the domain with a tensor grid of such cells
and evaluates every shared grid point exactly once, generalizing the
one-dimensional endpoint/midpoint pattern 1, 4, 2, 4, ..., 2, 4, 1.

All operations here are pure functions over immutable inputs and are
safe to call concurrently.  Sums are accumulated over a fixed pairwise
tree in lexicographic order, so identical inputs always produce
bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Sequence

Point = tuple[float, ...]
Integrand = Callable[[Point], float]

DEFAULT_DIM_CAP = 10
DEFAULT_EVAL_BUDGET = 10**8


class BudgetExceededError(ValueError):
    """A grid would need more integrand evaluations than the budget allows."""


class IntegrandError(RuntimeError):
    """Integrand evaluation failed; ``point`` is where it happened."""

    def __init__(self, point: Sequence[float], cause: object):
        self.point = tuple(point)
        super().__init__(f"integrand evaluation failed at {self.point}: {cause}")


@dataclass(frozen=True)
class Cuboid:
    """Axis-aligned integration domain stored as per-axis centers and half-widths."""

    centers: tuple[float, ...]
    half_widths: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "half_widths", tuple(float(h) for h in self.half_widths))
        if len(self.centers) != len(self.half_widths):
            raise ValueError(
                f"{len(self.centers)} centers but {len(self.half_widths)} half-widths"
            )
        if not self.centers:
            raise ValueError("a cuboid needs at least one axis")
        for axis, (center, half) in enumerate(zip(self.centers, self.half_widths)):
            if not (math.isfinite(center) and math.isfinite(half)):
                raise ValueError(f"axis {axis}: bounds must be finite")
            if half < 0.0:
                raise ValueError(f"axis {axis}: negative half-width {half}")

    @property
    def dim(self) -> int:
        return len(self.centers)

    def volume(self) -> float:
        return math.prod(2.0 * h for h in self.half_widths)

    def bounds(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        lower = tuple(c - h for c, h in zip(self.centers, self.half_widths))
        upper = tuple(c + h for c, h in zip(self.centers, self.half_widths))
        return lower, upper


def cuboid_from_bounds(lower: Sequence[float], upper: Sequence[float]) -> Cuboid:
    """Build a :class:`Cuboid` from per-axis lower/upper bounds.

    Bounds may coincide (degenerate axis of zero width) but must not be
    inverted; an inverted pair is rejected with its axis index.
    """
    if len(lower) != len(upper):
        raise ValueError(f"{len(lower)} lower bounds but {len(upper)} upper bounds")
    centers = []
    half_widths = []
    for axis, (lo, hi) in enumerate(zip(lower, upper)):
        lo, hi = float(lo), float(hi)
        if lo > hi:
            raise ValueError(f"axis {axis}: lower bound {lo} exceeds upper bound {hi}")
        centers.append((hi + lo) / 2.0)
        half_widths.append((hi - lo) / 2.0)
    return Cuboid(tuple(centers), tuple(half_widths))


@dataclass(frozen=True)
class StencilNode:
    """One lattice offset in {-1, 0, 1}^n with its integer weight 4^(#zeros)."""

    offset: tuple[int, ...]
    coefficient: int


def stencil(n: int, cap: int = DEFAULT_DIM_CAP) -> tuple[StencilNode, ...]:
    """All 3^n stencil nodes in lexicographic offset order.

    Each offset carries the exact integer coefficient 4**(number of zero
    entries); over a full stencil the coefficients sum to 6**n.
    """
    if not 1 <= n <= cap:
        raise ValueError(f"dimension must be between 1 and {cap}, got {n}")
    return tuple(
        StencilNode(offset, 4 ** offset.count(0))
        for offset in product((-1, 0, 1), repeat=n)
    )


def _pairwise_sum(terms: Iterable[float]) -> float:
    """Sum over a fixed binary tree; deterministic for a given term order."""
    stack: list[tuple[int, float]] = []  # (tree level, partial sum)
    for term in terms:
        level = 0
        value = term
        while stack and stack[-1][0] == level:
            value = stack.pop()[1] + value
            level += 1
        stack.append((level, value))
    total = 0.0
    while stack:
        total = stack.pop()[1] + total
    return total


def _evaluate(f: Integrand, point: Point) -> float:
    try:
        return f(point)
    except IntegrandError:
        raise
    except Exception as exc:
        raise IntegrandError(point, exc) from exc


@dataclass(frozen=True)
class QuadratureResult:
    """Integral estimate plus the exact number of integrand evaluations."""

    value: float
    evaluations: int


def single_cell_integrate(
    f: Integrand, domain: Cuboid, cap: int = DEFAULT_DIM_CAP
) -> QuadratureResult:
    """Apply the 3^n-point rule once over the whole cuboid.

    value = prod(half_widths) / 3^n * sum over offsets j in {-1,0,1}^n of
    4^(#zeros of j) * f(center + j * half_widths).  The stencil weights
    stay exact integers; the single prefactor is applied at the end.
    """
    nodes = stencil(domain.dim, cap=cap)
    centers = domain.centers
    half_widths = domain.half_widths

    def terms() -> Iterable[float]:
        for node in nodes:
            point = tuple(
                c + j * h for c, j, h in zip(centers, node.offset, half_widths)
            )
            yield node.coefficient * _evaluate(f, point)

    prefactor = math.prod(half_widths) / 3**domain.dim
    return QuadratureResult(prefactor * _pairwise_sum(terms()), len(nodes))


def weights_1d(m: int, half_width: float) -> list[float]:
    """Composite 1-D weights (h/3) * [1, 4, 2, 4, ..., 2, 4, 1] on 2m+1 points.

    h = half_width / m is the half-width of one of the m cells; the
    weights sum to the interval length 2 * half_width.
    """
    if m < 1:
        raise ValueError(f"need at least one cell, got {m}")
    base = half_width / m / 3.0
    weights = [4.0 * base if i % 2 else 2.0 * base for i in range(2 * m + 1)]
    weights[0] = base
    weights[-1] = base
    return weights


@dataclass(frozen=True)
class GridSpec:
    """Cells per axis for the composite rule; axis k contributes 2*m_k + 1 points."""

    cells: tuple[int, ...]
    budget: int = DEFAULT_EVAL_BUDGET

    def __post_init__(self) -> None:
        cells = []
        for axis, m in enumerate(self.cells):
            if m != int(m) or int(m) < 1:
                raise ValueError(f"axis {axis}: cells must be a positive integer, got {m!r}")
            cells.append(int(m))
        object.__setattr__(self, "cells", tuple(cells))
        if not self.cells:
            raise ValueError("a grid needs at least one axis")
        if self.point_count > self.budget:
            raise BudgetExceededError(
                f"grid needs {self.point_count} evaluations, budget is {self.budget}"
            )

    @property
    def point_count(self) -> int:
        return math.prod(2 * m + 1 for m in self.cells)


def composite_integrate(f: Integrand, domain: Cuboid, grid: GridSpec) -> QuadratureResult:
    """Composite rule on one shared tensor grid.

    Algebraically equal to summing :func:`single_cell_integrate` over
    every sub-cell of the grid, but each shared grid point is evaluated
    exactly once with the merged per-axis weights from
    :func:`weights_1d`.  Grid points are visited in lexicographic index
    order and accumulated over a fixed pairwise tree.
    """
    if len(grid.cells) != domain.dim:
        raise ValueError(f"grid has {len(grid.cells)} axes but domain has {domain.dim}")
    axis_weights = []
    axis_coords = []
    for center, half, m in zip(domain.centers, domain.half_widths, grid.cells):
        axis_weights.append(weights_1d(m, half))
        step = half / m
        axis_coords.append([center + (i - m) * step for i in range(2 * m + 1)])

    def terms() -> Iterable[float]:
        for index in product(*(range(2 * m + 1) for m in grid.cells)):
            point = tuple(coords[i] for coords, i in zip(axis_coords, index))
            weight = math.prod(w[i] for w, i in zip(axis_weights, index))
            yield weight * _evaluate(f, point)

    return QuadratureResult(_pairwise_sum(terms()), grid.point_count)
