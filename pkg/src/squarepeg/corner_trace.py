"""Rotation-intersection solving and tracing of the opposite-corner curve.

For an anchor t the lower-graph point O = (t, f(t)) is rotated a quarter turn.
For strictly contractive pairs the rotated lower graph meets the upper graph in
exactly one point R, the pre-image P = (u, f(u)) solves

    g(t + f(t) - f(u)) - f(t) - u + t = 0,

and O, P, R span a square whose fourth corner Q = P + R - O traces a Lipschitz
injective curve as t varies.  Four such corner curves exist, obtained by
choosing the rotation center on the lower or upper graph and the rotation
sign; families 2-4 are computed by conjugating family 1 under axis reflections
of the plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import LipschitzPair, PiecewiseLinearFunction, negated, reflected
from .errors import InvalidInputError

DEFAULT_TOL = 1e-12
DEFAULT_GRID = 4097
FAMILIES = (1, 2, 3, 4)


def transformed_pair(pair: LipschitzPair, family: int) -> LipschitzPair:
    """The pair seen in the canonical frame of the given family.

    Family 2 reverses the abscissa, family 4 swaps the roles of f and g via
    (f, g) -> (-g, -f), and family 3 does both.  Each transform is an
    involution, so applying it twice reproduces the input bit for bit.
    """
    if family == 1:
        return pair
    if family == 2:
        return LipschitzPair(reflected(pair.f), reflected(pair.g))
    if family == 3:
        return LipschitzPair(reflected(negated(pair.g)), reflected(negated(pair.f)))
    if family == 4:
        return LipschitzPair(negated(pair.g), negated(pair.f))
    raise InvalidInputError(f"family must be one of {FAMILIES}")


def to_original(points, family: int):
    """Map points from a family's canonical plane back to the original plane."""
    pts = np.asarray(points, dtype=float)
    if family == 1:
        return pts
    out = pts.copy()
    if family in (2, 3):
        out[..., 0] = -out[..., 0]
    if family in (3, 4):
        out[..., 1] = -out[..., 1]
    if family not in FAMILIES:
        raise InvalidInputError(f"family must be one of {FAMILIES}")
    return out


def _phi(pair: LipschitzPair, t, ft, u):
    # Non-increasing in u for 1-Lipschitz data: d(phi)/du lies in [-2, 0].
    return pair.g(t + ft - pair.f(u)) - ft - u + t


def solve_u_grid(pair: LipschitzPair, ts, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized rotation-intersection solve over an array of anchors.

    Bisection on the non-increasing residual; when the residual has a flat zero
    interval (possible only in the exactly-1-Lipschitz limit) the bracket
    shrinks toward its left end, so the leftmost root is returned.  Anchors
    with g(t) = f(t) return u = t exactly.
    """
    if tol <= 0.0:
        raise InvalidInputError("tol must be positive")
    ts = np.asarray(ts, dtype=float)
    if not np.isfinite(ts).all():
        raise InvalidInputError("anchors must be finite")
    ft = pair.f(ts)
    gap = pair.g(ts) - ft
    u = ts.astype(float).copy()
    active = gap > 0.0
    if not active.any():
        return u
    t_act = ts[active]
    f_act = ft[active]
    lo = t_act.copy()
    span = float(pair.g.values.max() - pair.f.values.min())
    hi = t_act + span + gap[active] + 1.0
    width = float((hi - lo).max())
    steps = max(1, int(np.ceil(np.log2(width / (0.25 * tol)))))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        positive = _phi(pair, t_act, f_act, mid) > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    u[active] = hi
    return u


def solve_u(pair: LipschitzPair, t: float, tol: float = DEFAULT_TOL) -> float:
    """Unique u >= t + (g(t) - f(t))/2 with rotation residual below tol."""
    return float(solve_u_grid(pair, np.array([float(t)]), tol)[0])


@dataclass(frozen=True, eq=False)
class CornerFrame:
    """One solved anchor: parameters (t, u, a, b) and the square O, P, Q, R.

    O = (t, f(t)) and P = (t+a, f(t)+b) lie on the lower graph, R = (t-b,
    f(t)+a) on the upper graph, and Q = (t+a-b, f(t)+a+b) is the traced
    opposite corner.  uses_extension marks frames with a vertex abscissa
    outside the pair's interval, i.e. vertices on the constant extension.
    """

    t: float
    u: float
    a: float
    b: float
    O: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    uses_extension: bool

    @property
    def sidelength(self) -> float:
        return float(np.hypot(self.a, self.b))


def _build_frame(pair: LipschitzPair, t: float, u: float) -> CornerFrame:
    ft = float(pair.f(t))
    a = u - t
    b = float(pair.f(u)) - ft
    corners = {
        "O": np.array([t, ft]),
        "P": np.array([t + a, ft + b]),
        "Q": np.array([t + a - b, ft + a + b]),
        "R": np.array([t - b, ft + a]),
    }
    xs = (t, t + a, t + a - b, t - b)
    uses_extension = any(x < pair.T0 or x > pair.T1 for x in xs)
    return CornerFrame(t, u, a, b, uses_extension=uses_extension, **corners)


def frame_at(pair: LipschitzPair, t: float, tol: float = DEFAULT_TOL) -> CornerFrame:
    return _build_frame(pair, float(t), solve_u(pair, t, tol))


@dataclass(frozen=True, eq=False)
class Trace:
    """Corner frames over a parameter grid, stored columnwise.

    The pair and the arrays live in the family's canonical frame; q_points
    maps the traced corners back to the original plane.
    """

    pair: LipschitzPair
    family: int
    grid: np.ndarray
    u: np.ndarray
    a: np.ndarray
    b: np.ndarray
    tol: float

    @property
    def q_canonical(self) -> np.ndarray:
        fg = self.pair.f(self.grid)
        return np.column_stack([self.grid + self.a - self.b, fg + self.a + self.b])

    @property
    def q_points(self) -> np.ndarray:
        return to_original(self.q_canonical, self.family)

    def frame(self, i: int) -> CornerFrame:
        return _build_frame(self.pair, float(self.grid[i]), float(self.u[i]))

    def frames(self):
        for i in range(self.grid.size):
            yield self.frame(i)

    def residuals(self) -> np.ndarray:
        ft = self.pair.f(self.grid)
        return np.abs(_phi(self.pair, self.grid, ft, self.u))


def trace(pair: LipschitzPair, n: int = DEFAULT_GRID, family: int = 1, tol: float = DEFAULT_TOL) -> Trace:
    """Corner frames over a uniform grid of n points on [T0 - M, T1 + M].

    The grid is extended by M on each side so the degenerate plateaus
    (u = t, a = b = 0 outside the interval) are visible.
    """
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    if family not in FAMILIES:
        raise InvalidInputError(f"family must be one of {FAMILIES}")
    canon = transformed_pair(pair, family)
    m = pair.M
    grid = np.linspace(canon.T0 - m, canon.T1 + m, int(n))
    u = solve_u_grid(canon, grid, tol)
    return Trace(canon, family, grid, u, u - grid, canon.f(u) - canon.f(grid), tol)


def collisions(tr: Trace, tol: float = 1e-9, min_step: int = 10) -> np.ndarray:
    """Grid index pairs at least min_step cells apart whose Q points nearly coincide.

    Empty output certifies the injectivity of the traced corner curve at the
    given tolerance.
    """
    from scipy.spatial import cKDTree

    pts = tr.q_canonical
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
    if pairs.size == 0:
        return pairs.reshape(0, 2)
    return pairs[np.abs(pairs[:, 0] - pairs[:, 1]) >= min_step]


def trace_to_csv(tr: Trace) -> str:
    """CSV export with columns t, u, a, b, Qx, Qy (Q in the original plane)."""
    q = tr.q_points
    lines = ["t,u,a,b,Qx,Qy"]
    for row in zip(tr.grid, tr.u, tr.a, tr.b, q[:, 0], q[:, 1]):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"
