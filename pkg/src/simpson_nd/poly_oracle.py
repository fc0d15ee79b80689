"""Exact integration of per-axis-quadratic polynomials and lattice functionals.

This module is the independent ground truth the quadrature rule is
checked against.  Polynomials with per-axis degree <= 2 are integrated
exactly from closed-form monomial moments; lattice samples can be
reduced, axis by axis, to individual coefficient combinations; and
:func:`verify_conjecture` compares the 3^n-point rule with the exact
value on seeded random instances.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .quad_core import (
    DEFAULT_DIM_CAP,
    Cuboid,
    Integrand,
    _evaluate,
    single_cell_integrate,
)

MultiIndex = tuple[int, ...]

MAX_MOMENT_DEGREE = 4

CENTER = "center"
SECOND_DIFF = "second_diff"

# Per-axis reduction vectors over lattice index j+1: picking the center
# plane, or the half second difference (w[-1] - 2 w[0] + w[+1]) / 2.
_FUNCTIONAL_VECTORS = {
    CENTER: np.array([0.0, 1.0, 0.0]),
    SECOND_DIFF: np.array([0.5, -1.0, 0.5]),
}


class TensorPoly:
    """Polynomial of per-axis degree <= 2, stored as a dense 3^n array.

    Coefficients are addressed by multi-indices (i_1, ..., i_n) with
    entries in {0, 1, 2}; missing entries are zero.  Instances are
    immutable and callable as integrands.
    """

    def __init__(self, dim: int, coeffs: Mapping[MultiIndex, float] | None = None):
        if dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")
        array = np.zeros((3,) * dim)
        for index, value in (coeffs or {}).items():
            index = tuple(index)
            if len(index) != dim or any(i not in (0, 1, 2) for i in index):
                raise ValueError(f"bad multi-index {index} for dimension {dim}")
            array[index] = float(value)
        array.setflags(write=False)
        self._array = array
        self.dim = dim

    @classmethod
    def from_array(cls, array: object) -> "TensorPoly":
        arr = np.array(array, dtype=float)
        if arr.ndim < 1 or arr.shape != (3,) * arr.ndim:
            raise ValueError(f"coefficient array must have shape (3,)*n, got {arr.shape}")
        poly = cls(arr.ndim)
        arr.setflags(write=False)
        poly._array = arr
        return poly

    @property
    def coeffs(self) -> dict[MultiIndex, float]:
        """Dense coefficient map over all 3^dim multi-indices."""
        indices = product((0, 1, 2), repeat=self.dim)
        return {index: float(v) for index, v in zip(indices, self._array.ravel())}

    def coefficient(self, index: MultiIndex) -> float:
        index = tuple(index)
        if len(index) != self.dim or any(i not in (0, 1, 2) for i in index):
            raise ValueError(f"bad multi-index {index} for dimension {self.dim}")
        return float(self._array[index])

    def coefficient_l1(self) -> float:
        return float(np.abs(self._array).sum())

    def as_array(self) -> np.ndarray:
        return self._array.copy()

    def __call__(self, point: Sequence[float]) -> float:
        return eval_poly(self, point)

    def __repr__(self) -> str:
        nonzero = int(np.count_nonzero(self._array))
        return f"TensorPoly(dim={self.dim}, nonzero_coeffs={nonzero})"


def eval_poly(poly: TensorPoly, point: Sequence[float]) -> float:
    """Evaluate by contracting one axis at a time with (1, x_k, x_k^2)."""
    if len(point) != poly.dim:
        raise ValueError(f"point has {len(point)} coordinates, polynomial has {poly.dim}")
    values = poly._array
    for x in point:
        x = float(x)
        values = np.array((1.0, x, x * x)) @ values.reshape(3, -1)
    return float(values[0])


def monomial_moment(degree: int, center: float, half_width: float) -> float:
    """Integral of x**degree over [center - half_width, center + half_width].

    Computed in the expanded central form (e.g. degree 2 gives
    2*h*(c**2 + h**2/3)) so nothing cancels when |center| >> half_width.
    """
    if degree != int(degree) or not 0 <= degree <= MAX_MOMENT_DEGREE:
        raise ValueError(f"degree must be an integer in 0..{MAX_MOMENT_DEGREE}, got {degree}")
    if half_width < 0:
        raise ValueError(f"half-width must be non-negative, got {half_width}")
    c = float(center)
    h = float(half_width)
    degree = int(degree)
    if degree == 0:
        return 2.0 * h
    if degree == 1:
        return 2.0 * c * h
    if degree == 2:
        return 2.0 * h * (c * c + h * h / 3.0)
    if degree == 3:
        return 2.0 * c * h * (c * c + h * h)
    return 2.0 * h * (c**4 + 2.0 * c * c * h * h + h**4 / 5.0)


def integrate_poly_exact(poly: TensorPoly, domain: Cuboid) -> float:
    """Exact integral: sum over multi-indices of coeff * prod_k moment(i_k)."""
    if poly.dim != domain.dim:
        raise ValueError(f"polynomial dimension {poly.dim} != domain dimension {domain.dim}")
    axis_moments = [
        np.array([monomial_moment(d, c, h) for d in range(3)])
        for c, h in zip(domain.centers, domain.half_widths)
    ]
    moment_grid = reduce(np.multiply.outer, axis_moments)
    return float(np.dot(poly._array.ravel(), moment_grid.ravel()))


@dataclass(frozen=True)
class QuadFit1D:
    """Coefficients of the parabola y = p*x**2 + q*x + r through three samples."""

    p: float
    q: float
    r: float

    def __call__(self, x: float) -> float:
        return (self.p * x + self.q) * x + self.r


def fit_quadratic_1d(
    x_mid: float, delta: float, y_left: float, y_mid: float, y_right: float
) -> QuadFit1D:
    """Parabola through (x_mid - delta, y_left), (x_mid, y_mid), (x_mid + delta, y_right)."""
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    curvature = (y_right - 2.0 * y_mid + y_left) / (2.0 * delta * delta)
    slope = (y_right - y_left) / (2.0 * delta)
    q = slope - 2.0 * curvature * x_mid
    r = y_mid - slope * x_mid + curvature * x_mid * x_mid
    return QuadFit1D(curvature, q, r)


@dataclass(frozen=True)
class LatticeSamples:
    """Integrand values on the full offset lattice {-1, 0, 1}^dim."""

    dim: int
    values: Mapping[tuple[int, ...], float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))
        expected = 3**self.dim
        if len(self.values) != expected:
            raise ValueError(f"expected {expected} lattice values, got {len(self.values)}")
        for offset in self.values:
            if len(offset) != self.dim or any(j not in (-1, 0, 1) for j in offset):
                raise ValueError(f"bad lattice offset {offset}")

    def value(self, offset: Sequence[int]) -> float:
        return self.values[tuple(offset)]

    def as_array(self) -> np.ndarray:
        """Values as a (3,)*dim array; array index i along an axis is offset i - 1."""
        array = np.empty((3,) * self.dim)
        for offset, value in self.values.items():
            array[tuple(j + 1 for j in offset)] = value
        return array


def lattice_samples(f: Integrand, domain: Cuboid, cap: int = DEFAULT_DIM_CAP) -> LatticeSamples:
    """Evaluate f at the 3^n points center + offset * half_widths."""
    n = domain.dim
    if n > cap:
        raise ValueError(f"dimension {n} exceeds the cap {cap}")
    values = {}
    for offset in product((-1, 0, 1), repeat=n):
        point = tuple(
            c + j * h for c, j, h in zip(domain.centers, offset, domain.half_widths)
        )
        values[offset] = float(_evaluate(f, point))
    return LatticeSamples(n, values)


def coefficient_functional(samples: LatticeSamples, mask: Sequence[str]) -> float:
    """Tensor functional over lattice samples, one reduction per axis.

    ``center`` picks the middle plane of an axis; ``second_diff``
    applies (w[-1] - 2*w[0] + w[+1]) / 2.  For samples of a
    :class:`TensorPoly` an all-center mask returns the value at the cell
    center, and every ``second_diff`` axis k replaces evaluation at the
    center by selecting the degree-2 coefficient slice times
    half_width_k**2, which isolates the corresponding coefficient
    combinations.
    """
    if len(mask) != samples.dim:
        raise ValueError(f"mask has {len(mask)} entries, lattice has dimension {samples.dim}")
    values = samples.as_array()
    for kind in mask:
        try:
            vector = _FUNCTIONAL_VECTORS[kind]
        except KeyError:
            raise ValueError(
                f"unknown functional kind {kind!r}; expected {CENTER!r} or {SECOND_DIFF!r}"
            ) from None
        values = vector @ values.reshape(3, -1)
    return float(values[0])


@dataclass(frozen=True)
class TrialFailure:
    trial: int
    rel_err: float


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of randomized exactness checks of the single-cell rule."""

    n: int
    trials: int
    seed: int
    rel_tol: float
    max_rel_err: float
    failures: tuple[TrialFailure, ...]
    passed: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "rel_tol": self.rel_tol,
            "max_rel_err": self.max_rel_err,
            "failures": [{"trial": f.trial, "rel_err": f.rel_err} for f in self.failures],
            "pass": self.passed,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # one independent, reproducible stream per trial
    return np.random.default_rng((seed & 0xFFFFFFFFFFFFFFFF, trial))


def random_instance(n: int, rng: np.random.Generator) -> tuple[TensorPoly, Cuboid]:
    """One random test instance: coefficients uniform in [-1, 1], centers
    in [-2, 2], half-widths in [0.1, 2]."""
    coeffs = rng.uniform(-1.0, 1.0, size=3**n)
    centers = rng.uniform(-2.0, 2.0, size=n)
    half_widths = rng.uniform(0.1, 2.0, size=n)
    poly = TensorPoly.from_array(coeffs.reshape((3,) * n))
    return poly, Cuboid(tuple(centers), tuple(half_widths))


def verify_conjecture(
    n: int, trials: int, seed: int, rel_tol: float, cap: int = DEFAULT_DIM_CAP
) -> VerificationReport:
    """Check that the 3^n-point rule integrates random per-axis-quadratic
    polynomials exactly, up to rounding, against the moment oracle.

    The relative error denominator is max(|exact|, 1e-3 * L1(coeffs) *
    volume) so near-zero integrals do not blow up the quotient.  Trials
    draw from independent per-trial streams, so the report depends only
    on (n, trials, seed, rel_tol).
    """
    if not 1 <= n <= cap:
        raise ValueError(f"dimension must be between 1 and {cap}, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be positive, got {trials}")
    if not rel_tol > 0:
        raise ValueError(f"rel_tol must be positive, got {rel_tol}")
    max_rel = 0.0
    failures = []
    for trial in range(trials):
        poly, domain = random_instance(n, _trial_rng(seed, trial))
        approx = single_cell_integrate(poly, domain, cap=cap).value
        exact = integrate_poly_exact(poly, domain)
        scale = max(abs(exact), 1e-3 * poly.coefficient_l1() * domain.volume())
        if scale == 0.0:
            rel = 0.0 if approx == exact else math.inf
        else:
            rel = abs(approx - exact) / scale
        if rel > max_rel:
            max_rel = rel
        if rel > rel_tol:
            failures.append(TrialFailure(trial, rel))
    return VerificationReport(
        n, trials, seed, rel_tol, max_rel, tuple(failures), not failures
    )
