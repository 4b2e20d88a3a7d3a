"""Line integrals, the conservation identity for square-traversing quadruples,
estimate inequalities as checkable predicates, and feasibility of the
universal constant.

Whenever four curves traverse squares,

    gamma1 = (x, y)            gamma2 = (x + a, y + b)
    gamma3 = (x + a - b, y + a + b)   gamma4 = (x - b, y + a),

the alternating sum of their y dx integrals equals the change of
(a^2 - b^2)/2 between the endpoints.  All f/g integrals here are computed in
closed form on the piecewise-linear data; only integrals along the traced
corner curve are trapezoidal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .corner_trace import Trace, frame_at
from .curve import LipschitzPair
from .errors import HypothesisViolationError, InvalidInputError

HYPOTHESIS_TOL = 1e-9


def line_integral_ydx(points) -> float:
    """Trapezoid value of the line integral of y dx; exact for polylines."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise InvalidInputError("need at least two planar points")
    x, y = pts[:, 0], pts[:, 1]
    return float(np.sum(0.5 * (y[:-1] + y[1:]) * np.diff(x)))


@dataclass(frozen=True, eq=False)
class QuadrupleTrace:
    """Sampled traversal data (x, y, a, b) of a square-traversing quadruple."""

    grid: np.ndarray
    x: np.ndarray
    y: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("grid", "x", "y", "a", "b"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise InvalidInputError(f"{name} must be one-dimensional")
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        sizes = {arr.size for arr in arrays.values()}
        if len(sizes) != 1 or self.grid.size < 2:
            raise InvalidInputError("x, y, a, b must share a grid of at least two points")
        if not np.all(np.diff(self.grid) > 0):
            raise InvalidInputError("grid must be strictly increasing")

    def gamma(self, k: int) -> np.ndarray:
        x, y, a, b = self.x, self.y, self.a, self.b
        if k == 1:
            return np.column_stack([x, y])
        if k == 2:
            return np.column_stack([x + a, y + b])
        if k == 3:
            return np.column_stack([x + a - b, y + a + b])
        if k == 4:
            return np.column_stack([x - b, y + a])
        raise InvalidInputError("k must be 1..4")


def conservation_residual(q: QuadrupleTrace) -> float:
    """Defect of the alternating-integral identity on the sampled quadruple."""
    lhs = (
        line_integral_ydx(q.gamma(1))
        - line_integral_ydx(q.gamma(2))
        + line_integral_ydx(q.gamma(3))
        - line_integral_ydx(q.gamma(4))
    )
    rhs = 0.5 * (q.a[-1] ** 2 - q.b[-1] ** 2) - 0.5 * (q.a[0] ** 2 - q.b[0] ** 2)
    return abs(float(lhs - rhs))


def quadruple_from_trace(tr: Trace, t_lo: float, t_hi: float) -> QuadrupleTrace:
    """Traversal data over [t_lo, t_hi]: grid frames plus exactly solved endpoints."""
    if t_hi < t_lo:
        raise InvalidInputError("need t_lo <= t_hi")
    if t_lo < tr.grid[0] or t_hi > tr.grid[-1]:
        raise InvalidInputError("window must lie inside the trace grid")
    inside = (tr.grid > t_lo) & (tr.grid < t_hi)
    lo = frame_at(tr.pair, t_lo, tr.tol)
    hi = frame_at(tr.pair, t_hi, tr.tol)
    grid = np.concatenate([[t_lo], tr.grid[inside], [t_hi]])
    a = np.concatenate([[lo.a], tr.a[inside], [hi.a]])
    b = np.concatenate([[lo.b], tr.b[inside], [hi.b]])
    return QuadrupleTrace(grid, grid.copy(), tr.pair.f(grid), a, b)


def lem2_residual(pair: LipschitzPair, tr: Trace, t: float, t_prime: float) -> float:
    """Residual of the graph form of the conservation identity on [t, t'].

    The f and g integrals are closed-form on the piecewise-linear data; the
    corner-curve integral is trapezoidal over the trace grid.
    """
    if t_prime < t:
        raise InvalidInputError("need t <= t'")
    if t < tr.grid[0] or t_prime > tr.grid[-1]:
        raise InvalidInputError("t and t' must lie in the trace grid range")
    lo = frame_at(pair, t, tr.tol)
    hi = frame_at(pair, t_prime, tr.tol)
    inside = (tr.grid > t) & (tr.grid < t_prime)
    q_pts = np.vstack([lo.Q[None, :], tr.q_canonical[inside], hi.Q[None, :]])
    lhs = (
        float(pair.f.integral(t, t + lo.a))
        - float(pair.f.integral(t_prime, t_prime + hi.a))
        + line_integral_ydx(q_pts)
        - float(pair.g.integral(t - lo.b, t_prime - hi.b))
    )
    rhs = 0.5 * (hi.a**2 - hi.b**2) - 0.5 * (lo.a**2 - lo.b**2)
    return abs(lhs - rhs)


def proph_bound(hc: float, hd: float, c: float, d: float) -> float:
    """Lower bound for the integral of a 1-Lipschitz h over [c, d] from its endpoint values.

    Tight exactly when h is the V shape dropping at slope -1 from h(c) and
    rising at slope +1 into h(d).
    """
    if d < c:
        raise InvalidInputError("need c <= d")
    if abs(hd - hc) > (d - c) + 1e-12:
        raise InvalidInputError("endpoint values violate the 1-Lipschitz bound")
    return 0.25 * (hd - hc) ** 2 + 0.5 * (d - c) * (hd + hc) - 0.25 * (d - c) ** 2


def est1_est2_check(pair: LipschitzPair, t: float, a: float, b: float, delta: float):
    """Evaluate the two-sided area estimate for an (approximately) inscribed square.

    Verifies the hypothesis equations

        f(t+a) = f(t) + b,   g(t-b) = f(t) + a,   g(t+a-b) = f(t) + a + b + delta,

    then returns (lhs, lower, upper) where lhs is the exact integral
    difference between the shifted g window and the f window; the mathematical
    guarantee is lower <= lhs <= upper.
    """
    if not a > 0.0:
        raise InvalidInputError("a must be positive")
    if abs(b) > a + 1e-12:
        raise InvalidInputError("|b| must not exceed a")
    ft = float(pair.f(t))
    checks = (
        ("f(t+a) = f(t) + b", float(pair.f(t + a)), ft + b),
        ("g(t-b) = f(t) + a", float(pair.g(t - b)), ft + a),
        ("g(t+a-b) = f(t) + a + b + delta", float(pair.g(t + a - b)), ft + a + b + delta),
    )
    for name, got, want in checks:
        if abs(got - want) > HYPOTHESIS_TOL:
            raise HypothesisViolationError(f"hypothesis equation {name} fails by {abs(got - want):.3e}")
    lhs = float(pair.g.integral(t - b, t + a - b) - pair.f.integral(t, t + a))
    lower = 0.5 * (a * a + b * b) + 0.5 * delta * (a + b) + 0.25 * delta * delta
    upper = 0.5 * (3.0 * a * a - b * b) + 0.5 * delta * (a - b) - 0.25 * delta * delta
    return lhs, lower, upper


def est3_check(M: float, delta: float, B: float, a: float, u: float):
    """Evaluate the quadratic box estimate; returns (value, bound) with value >= bound.

    Equality holds at the corner (a, u) = (M(1 + delta), M(1 - 1/B)/4).
    """
    if not (M > 0.0 and delta > 0.0 and B > 1.0):
        raise InvalidInputError("need M > 0, delta > 0, B > 1")
    slack = 1e-12 * max(1.0, M)
    if not (M * (1.0 - delta) - 2.0 * u - slack <= a <= M * (1.0 + delta) + slack):
        raise InvalidInputError("a outside the admissible range")
    if not (0.25 * M * (1.0 - 1.0 / B) - slack <= u <= 0.25 * M * (1.0 + 1.0 / B) + slack):
        raise InvalidInputError("u outside the admissible range")
    value = 0.25 * (M * M - a * a) + a * u - u * u
    bound = (M * M / 16.0) * (3.0 - 2.0 / B - 1.0 / B**2) - (M * M * delta / 4.0) * (1.0 + delta + 1.0 / B)
    return value, bound


@dataclass(frozen=True)
class ConstantParams:
    """A candidate (rho, B) for the universal sidelength constant, with derived D, F, G."""

    rho: float
    B: float

    @property
    def D(self) -> float:
        return self.B * self.rho + math.sqrt(2.0 * self.B**2 * self.rho**2 + self.B + 1.0)

    @property
    def F(self) -> float:
        return self.rho * self.D + 2.0 * self.B * self.rho**2

    @property
    def G(self) -> float:
        rho, B, D = self.rho, self.B, self.D
        return (
            6.0 * (2.0 + 1.0 / B) * rho * D
            + 4.0 * (2.0 + B) * rho**2
            + 9.0 * rho**2 * D**2
            + 22.0 * B * rho**3 * D
            + 8.0 * B**2 * rho**4
        )


def constant_feasible(params: ConstantParams):
    """Whether (rho, B) certifies the universal constant C = rho.

    Returns (feasible, cond1, cond2) with

        cond1 = 1 - 3/B - 4 rho D - 8 B rho^2
        cond2 = (3 - 2/B - 1/B^2)/16 - G/4

    and feasible iff both are strictly positive.
    """
    if not 0.0 < params.rho < 0.125:
        raise InvalidInputError("rho must lie in (0, 1/8)")
    if params.B < 2.0:
        raise InvalidInputError("B must be at least 2")
    rho, B, D = params.rho, params.B, params.D
    cond1 = 1.0 - 3.0 / B - 4.0 * rho * D - 8.0 * B * rho**2
    cond2 = (3.0 - 2.0 / B - 1.0 / B**2) / 16.0 - params.G / 4.0
    return (cond1 > 0.0 and cond2 > 0.0), cond1, cond2


def constants_table(rhos, bs) -> list[dict]:
    """Rows of (rho, B, D, F, G, cond1, cond2, feasible) for charting the feasible region."""
    rows = []
    for b in bs:
        for rho in rhos:
            p = ConstantParams(float(rho), float(b))
            feasible, cond1, cond2 = constant_feasible(p)
            rows.append(
                {
                    "rho": p.rho,
                    "B": p.B,
                    "D": p.D,
                    "F": p.F,
                    "G": p.G,
                    "cond1": cond1,
                    "cond2": cond2,
                    "feasible": feasible,
                }
            )
    return rows
