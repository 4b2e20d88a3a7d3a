"""Discretized set of opposite square corners of a closed polyline.

For each anchor O on the curve, the whole polyline is rotated a quarter turn
about O; every transversal intersection of the rotated polyline with the
original one is a point R = Rot_O(P) with P and R on the curve, and the triple
(O, P, R) spans a square whose opposite corner Q = P + R - O is collected.
The curve inscribes a square exactly when some Q falls back on the curve.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError
from .square_finder import InscribedSquare, _square_geometry_ok

DEGENERACY_FRACTION = 1e-9
ROTATION_TOL = 1e-9


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass(frozen=True, eq=False)
class ParametricPolyline:
    """An ordered planar polyline, treated cyclically when closed.

    The parameter runs in segment-index units: point_at(s) for s in [i, i+1]
    interpolates along segment i.
    """

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInputError("points must be an (m, 2) array")
        if self.closed and pts.shape[0] > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        needed = 3 if self.closed else 2
        if pts.shape[0] < needed:
            raise InvalidInputError(f"need at least {needed} distinct points")
        if not np.isfinite(pts).all():
            raise InvalidInputError("points must be finite")
        nxt = np.roll(pts, -1, axis=0) if self.closed else pts[1:]
        cur = pts if self.closed else pts[:-1]
        if np.any(np.hypot(*(nxt - cur).T) == 0.0):
            raise InvalidInputError("consecutive points must be distinct")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def segments(self):
        if self.closed:
            return self.points, np.roll(self.points, -1, axis=0)
        return self.points[:-1], self.points[1:]

    @property
    def segment_count(self) -> int:
        return self.points.shape[0] if self.closed else self.points.shape[0] - 1

    @property
    def perimeter(self) -> float:
        a, b = self.segments()
        return float(np.hypot(*(b - a).T).sum())

    @property
    def diameter(self) -> float:
        span = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.hypot(span[0], span[1]))

    def point_at(self, s: float) -> np.ndarray:
        m = self.segment_count
        if self.closed:
            s = s % m
        else:
            s = min(max(s, 0.0), float(m))
        i = min(int(math.floor(s)), m - 1)
        frac = s - i
        a, b = self.segments()
        return a[i] + frac * (b[i] - a[i])

    def is_simple(self) -> bool:
        """No two non-adjacent segments intersect or overlap."""
        a, b = self.segments()
        m = self.segment_count
        i, j = np.triu_indices(m, k=2)
        if self.closed:
            keep = ~((i == 0) & (j == m - 1))
            i, j = i[keep], j[keep]
        if i.size == 0:
            return True
        r = (b - a)[i]
        s = (b - a)[j]
        qp = a[j] - a[i]
        denom = _cross(r, s)
        parallel = denom == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(parallel, np.nan, _cross(qp, s) / denom)
            u = np.where(parallel, np.nan, _cross(qp, r) / denom)
        eps = 1e-12
        hits = (~parallel) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
        if hits.any():
            return False
        # collinear overlap check for parallel pairs on the same line
        col = parallel & (np.abs(_cross(qp, r)) <= eps * np.maximum(1.0, np.abs(denom)))
        if col.any():
            ii, jj = i[col], j[col]
            rr = (b - a)[ii]
            rr2 = np.einsum("ij,ij->i", rr, rr)
            p0 = np.einsum("ij,ij->i", a[jj] - a[ii], rr) / rr2
            p1 = np.einsum("ij,ij->i", b[jj] - a[ii], rr) / rr2
            lo = np.minimum(p0, p1)
            hi = np.maximum(p0, p1)
            if np.any((hi > eps) & (lo < 1 - eps)):
                return False
        return True

    def distance_to(self, pts) -> np.ndarray:
        """Euclidean distance from each query point to the polyline."""
        query = np.atleast_2d(np.asarray(pts, dtype=float))
        a, b = self.segments()
        seg = b - a
        seg_len2 = np.einsum("ij,ij->i", seg, seg)
        diff = query[:, None, :] - a[None, :, :]
        frac = np.clip(np.einsum("pmi,mi->pm", diff, seg) / seg_len2[None, :], 0.0, 1.0)
        closest = a[None, :, :] + frac[..., None] * seg[None, :, :]
        dist = np.hypot(*(query[:, None, :] - closest).transpose(2, 0, 1))
        return dist.min(axis=1)


def circle_polyline(radius: float = 1.0, m: int = 512, center=(0.0, 0.0)) -> ParametricPolyline:
    theta = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return ParametricPolyline(pts)


def ellipse_polyline(semi_x: float, semi_y: float, m: int = 512) -> ParametricPolyline:
    theta = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    pts = np.column_stack([semi_x * np.cos(theta), semi_y * np.sin(theta)])
    return ParametricPolyline(pts)


def pair_polyline(pair, points_per_segment: int = 1) -> ParametricPolyline:
    """Closed polyline tracing the lower graph left to right, then the upper graph back."""
    knots = np.unique(np.concatenate([pair.f.breakpoints, pair.g.breakpoints]))
    if points_per_segment > 1:
        dense = [np.linspace(knots[i], knots[i + 1], points_per_segment, endpoint=False) for i in range(knots.size - 1)]
        knots = np.append(np.concatenate(dense), knots[-1])
    lower = np.column_stack([knots, pair.f(knots)])
    upper = np.column_stack([knots[::-1], pair.g(knots[::-1])])
    return ParametricPolyline(np.vstack([lower, upper[1:-1]]))


def _rot90_about(pts: np.ndarray, origin: np.ndarray) -> np.ndarray:
    rel = pts - origin
    return np.column_stack([origin[0] - rel[..., 1], origin[1] + rel[..., 0]])


@dataclass(frozen=True, eq=False)
class SoscCloud:
    """Discretized opposite-square-corner samples of a polyline.

    Arrays are aligned: sample k has anchor index t_index[k] (anchor parameter
    t_index * segments / n_anchors), pre-image segment index u_index[k], and
    square corner data o, p, r, q.
    """

    source: ParametricPolyline
    n_anchors: int
    t_index: np.ndarray
    u_index: np.ndarray
    o: np.ndarray
    p: np.ndarray
    r: np.ndarray
    q: np.ndarray

    @property
    def pitch(self) -> float:
        """Arclength spacing between consecutive anchors."""
        return self.source.perimeter / self.n_anchors

    def __len__(self) -> int:
        return self.t_index.size


def _anchor_samples(curve: ParametricPolyline, origin: np.ndarray, tol: float):
    """Transversal intersections of the rotated polyline with the original one.

    A bounding-box prefilter keeps the exact segment-segment solve near linear
    in the segment count for non-pathological curves.
    """
    a, b = curve.segments()
    seg = b - a
    ra = _rot90_about(a, origin)
    rb = _rot90_about(b, origin)
    rseg = rb - ra
    lo_o = np.minimum(a, b)
    hi_o = np.maximum(a, b)
    lo_r = np.minimum(ra, rb)
    hi_r = np.maximum(ra, rb)
    overlap = (
        (lo_r[:, None, 0] <= hi_o[None, :, 0])
        & (hi_r[:, None, 0] >= lo_o[None, :, 0])
        & (lo_r[:, None, 1] <= hi_o[None, :, 1])
        & (hi_r[:, None, 1] >= lo_o[None, :, 1])
    )
    ii, jj = np.nonzero(overlap)
    if ii.size == 0:
        return ii, np.empty((0, 2)), np.empty((0, 2))
    qp = a[jj] - ra[ii]
    denom = _cross(rseg[ii], seg[jj])
    with np.errstate(divide="ignore", invalid="ignore"):
        t_par = _cross(qp, seg[jj]) / denom
        u_par = _cross(qp, rseg[ii]) / denom
    hit = (np.abs(denom) > 1e-14) & (t_par >= 0.0) & (t_par < 1.0) & (u_par >= 0.0) & (u_par < 1.0)
    ii, jj, t_par, u_par = ii[hit], jj[hit], t_par[hit], u_par[hit]
    if ii.size == 0:
        return ii, np.empty((0, 2)), np.empty((0, 2))
    p = a[ii] + t_par[:, None] * seg[ii]
    r = a[jj] + u_par[:, None] * seg[jj]
    residual = np.hypot(*(r - _rot90_about(p, origin)).T)
    keep = residual <= max(tol, 1e-12 * max(1.0, curve.diameter))
    keep &= np.hypot(*(p - origin).T) > DEGENERACY_FRACTION * curve.diameter
    order = np.lexsort((u_par[keep], ii[keep]))
    return ii[keep][order], p[keep][order], r[keep][order]


def sosc_cloud(curve: ParametricPolyline, n: int, tol: float = ROTATION_TOL) -> SoscCloud:
    """Sample the set of opposite square corners with n rotation anchors.

    Raises on open or self-intersecting polylines and for n < 8.  Degenerate
    triples with |P - O| below 1e-9 times the diameter are discarded.
    """
    if not curve.closed:
        raise InvalidInputError("the polyline must be closed")
    if n < 8:
        raise InvalidInputError("need at least 8 anchors")
    if not curve.is_simple():
        raise InvalidInputError("polyline is not simple (self-intersection detected)")
    m = curve.segment_count
    t_idx, u_idx, os_, ps, rs = [], [], [], [], []
    for k in range(int(n)):
        origin = curve.point_at(k * m / n)
        seg_idx, p, r = _anchor_samples(curve, origin, tol)
        if seg_idx.size == 0:
            continue
        t_idx.append(np.full(seg_idx.size, k))
        u_idx.append(seg_idx)
        os_.append(np.broadcast_to(origin, (seg_idx.size, 2)))
        ps.append(p)
        rs.append(r)
    if t_idx:
        t_index = np.concatenate(t_idx)
        u_index = np.concatenate(u_idx)
        o = np.vstack(os_)
        p = np.vstack(ps)
        r = np.vstack(rs)
    else:
        t_index = np.empty(0, dtype=int)
        u_index = np.empty(0, dtype=int)
        o = p = r = np.empty((0, 2))
    return SoscCloud(curve, int(n), t_index, u_index, o, p, r, p + r - o)


def _refined_candidate(curve: ParametricPolyline, s: float, i: int, j: int):
    """Re-intersect the fixed segment pair (i, j) for an anchor at parameter s."""
    a, b = curve.segments()
    origin = curve.point_at(s)
    ra = _rot90_about(a[i][None, :], origin)[0]
    rb = _rot90_about(b[i][None, :], origin)[0]
    r_vec = rb - ra
    s_vec = b[j] - a[j]
    denom = r_vec[0] * s_vec[1] - r_vec[1] * s_vec[0]
    if denom == 0.0:
        return None
    qp = a[j] - ra
    t_par = (qp[0] * s_vec[1] - qp[1] * s_vec[0]) / denom
    u_par = (qp[0] * r_vec[1] - qp[1] * r_vec[0]) / denom
    if not (0.0 <= t_par <= 1.0 and 0.0 <= u_par <= 1.0):
        return None
    p = a[i] + t_par * (b[i] - a[i])
    r = a[j] + u_par * s_vec
    if np.hypot(*(p - origin)) <= DEGENERACY_FRACTION * curve.diameter:
        return None
    return origin, p, r, p + r - origin


def _segment_index_of(curve: ParametricPolyline, point: np.ndarray) -> int:
    a, b = curve.segments()
    seg = b - a
    diff = point[None, :] - a
    frac = np.clip(np.einsum("ij,ij->i", diff, seg) / np.einsum("ij,ij->i", seg, seg), 0.0, 1.0)
    closest = a + frac[:, None] * seg
    return int(np.argmin(np.hypot(*(point[None, :] - closest).T)))


def _refine_anchor(curve, cloud, k, tol):
    """Local anchor-parameter search minimizing the distance of Q to the curve.

    The intersected segment pair is held fixed while the anchor slides over
    one anchor step on each side.
    """
    step = curve.segment_count / cloud.n_anchors
    s0 = cloud.t_index[k] * step
    i = int(cloud.u_index[k])
    j = _segment_index_of(curve, cloud.r[k])
    best = (
        float(curve.distance_to(cloud.q[k])[0]),
        cloud.o[k],
        cloud.p[k],
        cloud.r[k],
        cloud.q[k],
    )
    for s in np.linspace(s0 - step, s0 + step, 17):
        cand = _refined_candidate(curve, s, i, j)
        if cand is None:
            continue
        d = float(curve.distance_to(cand[3])[0])
        if d < best[0]:
            best = (d, *cand)
    return best


def inscribed_squares_general(
    curve: ParametricPolyline, n: int, tol: float = 1e-3
) -> list[InscribedSquare]:
    """Squares inscribed in a general closed polyline, from cloud samples whose
    corner Q falls within tol of the curve; sorted by sidelength descending."""
    cloud = sosc_cloud(curve, n, ROTATION_TOL)
    if len(cloud) == 0:
        return []
    dist = curve.distance_to(cloud.q)
    squares = []
    for k in np.nonzero(dist <= tol)[0]:
        o, p, r, q = cloud.o[k], cloud.p[k], cloud.r[k], cloud.q[k]
        d = float(dist[k])
        if d > 0.1 * tol:
            d, o, p, r, q = _refine_anchor(curve, cloud, int(k), tol)
            if d > tol:
                continue
        vertices = np.vstack([o, p, q, r])
        side = float(np.hypot(*(p - o)))
        if side <= 0.0:
            continue
        if not _square_geometry_ok(vertices, side, max(tol, 1e-9)):
            continue
        if curve.distance_to(vertices).max() > tol:
            continue
        step = curve.segment_count / cloud.n_anchors
        squares.append(
            InscribedSquare(
                vertices=vertices,
                sidelength=side,
                family=0,
                t=float(cloud.t_index[k] * step),
            )
        )
    squares.sort(key=lambda s: -s.sidelength)
    return squares


def cluster_count(points, radius: float) -> int:
    """Number of connected components of the points at the given linking radius."""
    from scipy.spatial import cKDTree

    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return 0
    parent = np.arange(pts.shape[0])

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in cKDTree(pts).query_pairs(radius, output_type="ndarray"):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(x) for x in range(pts.shape[0])})


def cloud_to_csv(cloud: SoscCloud) -> str:
    lines = ["t_index,u_index,Qx,Qy"]
    for k in range(len(cloud)):
        lines.append(
            f"{int(cloud.t_index[k])},{int(cloud.u_index[k])},{float(cloud.q[k, 0])!r},{float(cloud.q[k, 1])!r}"
        )
    return "\n".join(lines) + "\n"


def polyline_to_dict(curve: ParametricPolyline) -> dict:
    return {"points": curve.points.tolist(), "closed": curve.closed}


def polyline_from_dict(data: dict) -> ParametricPolyline:
    try:
        return ParametricPolyline(data["points"], bool(data.get("closed", True)))
    except InvalidInputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed polyline file: {exc}") from exc


def save_polyline(curve: ParametricPolyline, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(polyline_to_dict(curve), indent=2))
    return path


def load_polyline(path) -> ParametricPolyline:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read polyline file {path}: {exc}") from exc
    return polyline_from_dict(data)
