"""Detection and verification of inscribed squares, and the crossing-window diagnostic.

A frame's opposite corner Q lies on the upper graph exactly when its vertical
defect f(t) + a + b - g(t + a - b) vanishes, and then O, P, Q, R is a genuine
inscribed square.  Squares are found as sign changes of the defect along each
family trace and refined by bisection in t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import corner_trace
from .conservation import line_integral_ydx
from .corner_trace import CornerFrame, Trace, _build_frame, solve_u_grid, to_original
from .curve import LipschitzPair
from .errors import InvalidInputError, ResolutionInsufficientError

DEFAULT_GRID = 8193
DEFAULT_TOL = 1e-9
SOLVER_TOL = 1e-12
DEGENERATE_FRACTION = 1e-6


@dataclass(frozen=True, eq=False)
class InscribedSquare:
    """Four vertices on the curve in cyclic order, with the generating frame data.

    family is 1..4 for graph-pair traces and 0 for squares found on a general
    polyline; t is the parameter of the generating frame (an anchor parameter
    for polylines).  uses_extension marks squares with a vertex on the
    constant extension of the pair outside its interval.
    """

    vertices: np.ndarray
    sidelength: float
    family: int
    t: float
    uses_extension: bool = False

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (4, 2):
            raise InvalidInputError("a square needs exactly four planar vertices")
        object.__setattr__(self, "vertices", v)
        if not self.sidelength > 0.0:
            raise InvalidInputError("sidelength must be positive")


@dataclass(frozen=True)
class CrossingWindow:
    """Extremal small-square crossing times around the max-gap abscissa.

    t0 (resp. t1) is the last (resp. first) crossing time at or before (after)
    T whose square satisfies a <= rho M; tau_i = t_i + a_i - b_i are the upper
    graph abscissae of the corresponding corners, sigma the orientation of the
    loop formed by the corner curve and the graph of g between them, and area
    the enclosed area from the Stokes line integral.
    """

    rho: float
    t0: float
    t1: float
    tau0: float
    tau1: float
    sigma: int
    area: float


def vertical_defect(pair: LipschitzPair, frame: CornerFrame) -> float:
    """f(t) + a + b - g(t + a - b); zero exactly when Q lies on the upper graph."""
    return float(frame.Q[1] - pair.g(frame.Q[0]))


def _defect_values(pair: LipschitzPair, ts, a, b):
    return pair.f(ts) + a + b - pair.g(ts + a - b)


def _solve_abd(pair: LipschitzPair, ts):
    u = solve_u_grid(pair, ts, SOLVER_TOL)
    a = u - ts
    b = pair.f(u) - pair.f(ts)
    return u, a, b, _defect_values(pair, ts, a, b)


def _refine_crossings(pair: LipschitzPair, lo, hi, lo_sign, tol, max_iter=90):
    """Bisection in t on brackets with opposite defect signs; lockstep over all brackets."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    target = 0.0625 * tol
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        u_mid, _, _, d = _solve_abd(pair, mid)
        if np.all(np.abs(d) <= target):
            break
        if np.all((hi - lo) <= 1e-17 * np.maximum(1.0, np.abs(mid))):
            break
        same = np.sign(d) == lo_sign
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    converged = np.abs(d) <= 4.0 * tol
    return mid[converged], u_mid[converged]


_INVPHI = 0.5 * (np.sqrt(5.0) - 1.0)


def _refine_side_minima(pair: LipschitzPair, lo, hi, iters=70):
    """Golden-section minimization of the frame sidelength over [lo, hi], lockstep."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)

    def side(ts):
        u = solve_u_grid(pair, ts, SOLVER_TOL)
        return np.hypot(u - ts, pair.f(u) - pair.f(ts))

    for _ in range(iters):
        left = hi - _INVPHI * (hi - lo)
        right = lo + _INVPHI * (hi - lo)
        shrink_right = side(left) < side(right)
        hi = np.where(shrink_right, right, hi)
        lo = np.where(shrink_right, lo, left)
    mid = 0.5 * (lo + hi)
    return mid, solve_u_grid(pair, mid, SOLVER_TOL)


def _flat_run_minima(grid, side, flat, run_slices, floor):
    """Candidate brackets around sidelength local minima inside flat runs."""
    lo, hi = [], []
    for start, stop in run_slices:
        if stop - start < 3:
            continue
        s = side[start:stop]
        if s.max() <= floor:
            continue
        interior = np.arange(1, stop - start - 1)
        is_min = (s[interior] <= s[interior - 1]) & (s[interior] <= s[interior + 1]) & (s[interior] > floor)
        picks = interior[is_min]
        if picks.size == 0:
            k = int(np.argmin(np.where(s > floor, s, np.inf)))
            picks = np.array([k]) if 0 < k < stop - start - 1 else np.array([], dtype=int)
        for k in picks:
            lo.append(grid[start + k - 1])
            hi.append(grid[start + k + 1])
    return np.array(lo), np.array(hi)


def _flat_runs(flat) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, is_flat in enumerate(flat):
        if is_flat and start is None:
            start = i
        elif not is_flat and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, flat.size))
    return runs


def _candidate_params(pair: LipschitzPair, tr: Trace, tol: float):
    """Refined parameters where the traced corner meets the upper graph.

    Transversal crossings are bisected between grid points of opposite defect
    sign.  Runs where the defect sits at solver-noise level (continuum of
    inscribed squares, possible only for exactly 1-Lipschitz pairs, plus the
    degenerate plateaus outside the interval) are handled separately: the
    sidelength local minima inside each run are refined by golden section.
    """
    d = _defect_values(tr.pair, tr.grid, tr.a, tr.b)
    scale = max(
        1.0,
        float(np.abs(tr.pair.f.values).max()),
        float(np.abs(tr.pair.g.values).max()),
    )
    plateau_tol = max(1e-11, 1e-14 * scale)
    flat = np.abs(d) <= plateau_tol
    side = np.hypot(tr.a, tr.b)
    floor = DEGENERATE_FRACTION * tr.pair.M

    ts_parts, us_parts = [], []
    idx = np.nonzero(~flat[:-1] & ~flat[1:] & (d[:-1] * d[1:] < 0.0))[0]
    if idx.size:
        mid, u_mid = _refine_crossings(tr.pair, tr.grid[idx], tr.grid[idx + 1], np.sign(d[idx]), tol)
        ts_parts.append(mid)
        us_parts.append(u_mid)
    # isolated flat points adjacent to non-flat neighbours are crossings hit exactly
    lone = flat.copy()
    lone[1:] &= ~flat[:-1]
    lone[:-1] &= ~flat[1:]
    lone &= side > floor
    if lone.any():
        ts_parts.append(tr.grid[lone])
        us_parts.append(tr.u[lone])
    run_slices = [(a_, b_) for a_, b_ in _flat_runs(flat) if b_ - a_ >= 2]
    lo, hi = _flat_run_minima(tr.grid, side, flat, run_slices, floor)
    if lo.size:
        mid, u_mid = _refine_side_minima(tr.pair, lo, hi)
        d_min = _defect_values(tr.pair, mid, u_mid - mid, tr.pair.f(u_mid) - tr.pair.f(mid))
        keep = np.abs(d_min) <= max(tol, plateau_tol)
        ts_parts.append(mid[keep])
        us_parts.append(u_mid[keep])
    if not ts_parts:
        return np.empty(0), np.empty(0)
    ts = np.concatenate(ts_parts)
    us = np.concatenate(us_parts)
    order = np.argsort(ts)
    return ts[order], us[order]


def _square_from_frame(frame: CornerFrame, family: int) -> InscribedSquare:
    canonical = np.vstack([frame.O, frame.P, frame.Q, frame.R])
    return InscribedSquare(
        vertices=to_original(canonical, family),
        sidelength=frame.sidelength,
        family=family,
        t=frame.t,
        uses_extension=frame.uses_extension,
    )


def find_squares(
    pair: LipschitzPair,
    n: int = DEFAULT_GRID,
    families=(1, 2, 3, 4),
    tol: float = DEFAULT_TOL,
    retries: int = 1,
) -> list[InscribedSquare]:
    """Inscribed squares arising as corner-curve crossings, sorted by sidelength.

    Scans each requested family trace for sign changes of the vertical defect,
    refines each bracket to |defect| <= tol, and discards near-degenerate
    squares with sidelength <= 1e-6 M.  If nothing is found the scan is
    retried once at four times the resolution.
    """
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    families = tuple(sorted(set(int(f) for f in families)))
    for f in families:
        if f not in corner_trace.FAMILIES:
            raise InvalidInputError(f"family must be one of {corner_trace.FAMILIES}")
    floor = DEGENERATE_FRACTION * pair.M
    squares: list[InscribedSquare] = []
    for family in families:
        tr = corner_trace.trace(pair, n, family, SOLVER_TOL)
        ts, us = _candidate_params(pair, tr, tol)
        for t, u in zip(ts, us):
            frame = _build_frame(tr.pair, float(t), float(u))
            if frame.sidelength <= floor:
                continue
            square = _square_from_frame(frame, family)
            if verify_square(pair, square, max(tol, 1e-10)):
                squares.append(square)
    if not squares and retries > 0:
        return find_squares(pair, 4 * (n - 1) + 1, families, tol, retries - 1)
    squares.sort(key=lambda s: -s.sidelength)
    return squares


def _square_geometry_ok(vertices: np.ndarray, sidelength: float, tol: float) -> bool:
    edges = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    scale = max(1.0, sidelength)
    if np.abs(lengths - sidelength).max() > tol * scale:
        return False
    dots = np.abs(np.sum(edges * np.roll(edges, -1, axis=0), axis=1))
    return float(dots.max()) <= tol * scale * scale


def verify_square(pair: LipschitzPair, square: InscribedSquare, tol: float = DEFAULT_TOL) -> bool:
    """True iff all vertices sit on the graph union and the quadrilateral is a square.

    Vertex membership is measured vertically, which is equivalent to planar
    distance up to a factor sqrt(2) for 1-Lipschitz graphs.
    """
    v = np.asarray(square.vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    on_curve = np.minimum(np.abs(y - pair.f(x)), np.abs(y - pair.g(x))) <= tol
    if not bool(on_curve.all()):
        return False
    return _square_geometry_ok(v, square.sidelength, tol)


def crossing_window(
    pair: LipschitzPair,
    rho: float,
    n: int = DEFAULT_GRID,
    tol: float = DEFAULT_TOL,
) -> CrossingWindow:
    """Locate the extremal small-square crossings around T and their enclosed area.

    Requires a strictly contractive pair (shrink it first) and rho < 1/8.  The
    interval endpoints always qualify because the frames there are degenerate
    (a = 0 and Q on the upper graph).
    """
    if not 0.0 < rho < 0.125:
        raise InvalidInputError("rho must lie in (0, 1/8)")
    if pair.lipschitz_constant >= 1.0:
        raise InvalidInputError("pair must be strictly contractive; apply shrink first")
    if n < 2:
        raise InvalidInputError("n must be at least 2")
    m, t_max = pair.M, pair.T
    tr = corner_trace.trace(pair, n, 1, SOLVER_TOL)
    ts, us = _candidate_params(pair, tr, tol)
    a = us - ts
    cand_t = np.concatenate([[pair.T0, pair.T1], ts])
    cand_a = np.concatenate([[0.0, 0.0], a])
    small = cand_a <= rho * m
    left = small & (cand_t <= t_max)
    right = small & (cand_t >= t_max)
    if not left.any() or not right.any():
        raise ResolutionInsufficientError(
            f"no qualifying crossings at resolution n={n}; increase the grid"
        )
    t0 = float(cand_t[left].max())
    t1 = float(cand_t[right].min())
    lo = corner_trace.frame_at(pair, t0, SOLVER_TOL)
    hi = corner_trace.frame_at(pair, t1, SOLVER_TOL)
    tau0 = t0 + lo.a - lo.b
    tau1 = t1 + hi.a - hi.b
    window = np.linspace(t0, t1, int(n))
    u_win = solve_u_grid(pair, window, SOLVER_TOL)
    a_win = u_win - window
    b_win = pair.f(u_win) - pair.f(window)
    q_pts = np.column_stack([window + a_win - b_win, pair.f(window) + a_win + b_win])
    signed = line_integral_ydx(q_pts) - float(pair.g.integral(tau0, tau1))
    sigma = 1 if signed >= 0.0 else -1
    return CrossingWindow(rho, t0, t1, tau0, tau1, sigma, abs(signed))


def squares_to_json(squares: list[InscribedSquare]) -> list[dict]:
    """JSON-ready export: family, t, sidelength, vertices."""
    return [
        {
            "family": s.family,
            "t": s.t,
            "sidelength": s.sidelength,
            "vertices": [[float(x), float(y)] for x, y in s.vertices],
            "uses_extension": s.uses_extension,
        }
        for s in squares
    ]
