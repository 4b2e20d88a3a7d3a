"""Piecewise-linear 1-Lipschitz function pairs whose graph unions form the curves under study.

A curve here is the union of the graphs of two functions f <= g on a common
interval, with equal values at both endpoints and g strictly above f inside.
Functions are extended constantly outside their breakpoint span, so every
operation is defined on the whole real line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

_MAX_GENERATION_TRIES = 100_000


def _frozen_array(data) -> np.ndarray:
    arr = np.array(data, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFunction:
    """A 1-Lipschitz piecewise-linear function with constant extension outside its span.

    Evaluation interpolates linearly between breakpoints and returns the
    boundary value outside [breakpoints[0], breakpoints[-1]].
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.breakpoints)
        y = _frozen_array(self.values)
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
            raise InvalidInputError("breakpoints and values must be 1-d arrays of equal length")
        if x.size < 2:
            raise InvalidInputError("need at least two breakpoints")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidInputError("breakpoints and values must be finite")
        if not np.all(np.diff(x) > 0):
            raise InvalidInputError("breakpoints must be strictly increasing")
        slopes = np.diff(y) / np.diff(x)
        worst = float(np.abs(slopes).max())
        if worst > 1.0:
            raise InvalidInputError(f"slopes exceed 1 in absolute value (max |slope| = {worst:.17g})")
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "values", y)
        object.__setattr__(self, "_slopes", slopes)
        cumulative = np.empty(x.size)
        cumulative[0] = 0.0
        np.cumsum(0.5 * (y[:-1] + y[1:]) * np.diff(x), out=cumulative[1:])
        object.__setattr__(self, "_cumulative", cumulative)

    @property
    def lo(self) -> float:
        return float(self.breakpoints[0])

    @property
    def hi(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def lipschitz_constant(self) -> float:
        """Exact maximum absolute segment slope."""
        return float(np.abs(self._slopes).max())

    def __call__(self, t):
        return np.interp(t, self.breakpoints, self.values)

    def antiderivative(self, t):
        """Exact antiderivative, zero at the first breakpoint, linear outside the span."""
        x, y, s, c = self.breakpoints, self.values, self._slopes, self._cumulative
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(x, t, side="right") - 1, 0, x.size - 2)
        dt = t - x[i]
        inside = c[i] + y[i] * dt + 0.5 * s[i] * dt * dt
        left = y[0] * (t - x[0])
        right = c[-1] + y[-1] * (t - x[-1])
        return np.where(t < x[0], left, np.where(t > x[-1], right, inside))

    def integral(self, a, b):
        """Signed integral over [a, b]; exact for piecewise-linear data."""
        return self.antiderivative(b) - self.antiderivative(a)


def reflected(func: PiecewiseLinearFunction) -> PiecewiseLinearFunction:
    """The function x -> func(-x)."""
    return PiecewiseLinearFunction(-func.breakpoints[::-1], func.values[::-1])


def negated(func: PiecewiseLinearFunction) -> PiecewiseLinearFunction:
    return PiecewiseLinearFunction(func.breakpoints, -func.values)


def constant(value: float, lo: float, hi: float) -> PiecewiseLinearFunction:
    return PiecewiseLinearFunction([lo, hi], [value, value])


def tent(lo: float = 0.0, hi: float = 2.0, height: float | None = None) -> PiecewiseLinearFunction:
    """Symmetric tent over [lo, hi], zero at the ends; default height makes slopes +-1."""
    mid = 0.5 * (lo + hi)
    if height is None:
        height = mid - lo
    return PiecewiseLinearFunction([lo, mid, hi], [0.0, height, 0.0])


@dataclass(frozen=True, eq=False)
class LipschitzPair:
    """A pair (f, g) on a shared interval with equal endpoint values and g > f inside.

    The maximum gap M = max(g - f) and an abscissa T attaining it are computed
    at construction; for piecewise-linear data the maximum over the merged
    interior breakpoints is the exact maximum over the interval.
    """

    f: PiecewiseLinearFunction
    g: PiecewiseLinearFunction

    def __post_init__(self):
        f, g = self.f, self.g
        if f.lo != g.lo or f.hi != g.hi:
            raise InvalidInputError("f and g must live on the same interval")
        if f.values[0] != g.values[0]:
            raise InvalidInputError("f and g must agree exactly at the left endpoint")
        if f.values[-1] != g.values[-1]:
            raise InvalidInputError("f and g must agree exactly at the right endpoint")
        knots = np.unique(np.concatenate([f.breakpoints, g.breakpoints]))
        inner = knots[1:-1]
        if inner.size == 0:
            raise InvalidInputError("degenerate pair: no interior breakpoints, g coincides with f")
        gaps = g(inner) - f(inner)
        bad = np.nonzero(gaps <= 0.0)[0]
        if bad.size:
            raise InvalidInputError(f"g - f is not positive at interior breakpoint t = {inner[bad[0]]!r}")
        k = int(np.argmax(gaps))
        object.__setattr__(self, "_max_gap", (float(gaps[k]), float(inner[k])))

    @property
    def T0(self) -> float:
        return self.f.lo

    @property
    def T1(self) -> float:
        return self.f.hi

    @property
    def M(self) -> float:
        return self._max_gap[0]

    @property
    def T(self) -> float:
        return self._max_gap[1]

    @property
    def lipschitz_constant(self) -> float:
        return max(self.f.lipschitz_constant, self.g.lipschitz_constant)


def max_gap(pair: LipschitzPair) -> tuple[float, float]:
    """Maximum of g - f over the interval and an abscissa attaining it."""
    m, t = pair.M, pair.T
    if not m > 0.0:
        raise InvalidInputError("degenerate pair: max(g - f) is not positive")
    return m, t


def shrink(pair: LipschitzPair, epsilon: float) -> LipschitzPair:
    """Scale both functions by (1 - epsilon), making the pair strictly contractive."""
    if not 0.0 < epsilon < 1.0:
        raise InvalidInputError("epsilon must lie in (0, 1)")
    c = 1.0 - epsilon
    return LipschitzPair(
        PiecewiseLinearFunction(pair.f.breakpoints, c * pair.f.values),
        PiecewiseLinearFunction(pair.g.breakpoints, c * pair.g.values),
    )


def _random_bridge(rng: np.random.Generator, n: int, h: float, lip: float, ramp: np.ndarray) -> np.ndarray:
    """Values of a random lip-Lipschitz piecewise-linear bridge (zero at both ends)."""
    s = rng.uniform(-lip, lip, n)
    s -= s.mean()
    m = float(np.abs(s).max())
    if m > lip:
        s *= lip / m
    v = np.empty(n + 1)
    v[0] = 0.0
    np.cumsum(s * h, out=v[1:])
    v -= v[-1] * ramp
    # The endpoint correction can push a slope past lip by a few ulp; scale back.
    for _ in range(4):
        worst = float(np.abs(np.diff(v)).max() / h)
        if worst <= lip:
            break
        v *= lip / worst
    return v


def random_pair(seed: int, depth: int, lip: float = 0.99) -> LipschitzPair:
    """Random pair over a dyadic partition of [0, 1] into 2**depth cells.

    Slopes are drawn uniformly in [-lip, lip]; the endpoint constraint is closed
    by an affine correction, the Lipschitz bound is restored by uniform
    rescaling, and interior positivity of g - f is enforced by re-drawing.
    Deterministic in the seed.
    """
    if depth < 1:
        raise InvalidInputError("depth must be at least 1")
    if not 0.0 < lip <= 1.0:
        raise InvalidInputError("lip must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    n = 2 ** int(depth)
    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    ramp = x.copy()
    for _ in range(_MAX_GENERATION_TRIES):
        vf = _random_bridge(rng, n, h, lip, ramp)
        vg = _random_bridge(rng, n, h, lip, ramp)
        if np.all(vg[1:-1] > vf[1:-1]):
            return LipschitzPair(
                PiecewiseLinearFunction(x, vf),
                PiecewiseLinearFunction(x, vg),
            )
    raise RuntimeError(
        f"no admissible pair after {_MAX_GENERATION_TRIES} draws (seed={seed}, depth={depth}, lip={lip})"
    )


def pair_to_dict(pair: LipschitzPair) -> dict:
    return {
        "T0": pair.T0,
        "T1": pair.T1,
        "f": {"x": pair.f.breakpoints.tolist(), "y": pair.f.values.tolist()},
        "g": {"x": pair.g.breakpoints.tolist(), "y": pair.g.values.tolist()},
    }


def pair_from_dict(data: dict) -> LipschitzPair:
    """Build a pair from the JSON curve schema, reporting the first violated invariant."""
    try:
        f = PiecewiseLinearFunction(data["f"]["x"], data["f"]["y"])
        g = PiecewiseLinearFunction(data["g"]["x"], data["g"]["y"])
        t0, t1 = float(data["T0"]), float(data["T1"])
    except InvalidInputError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed curve file: {exc}") from exc
    pair = LipschitzPair(f, g)
    if pair.T0 != t0 or pair.T1 != t1:
        raise InvalidInputError("T0/T1 do not match the breakpoint spans")
    return pair


def save_pair(pair: LipschitzPair, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(pair_to_dict(pair), indent=2))
    return path


def load_pair(path) -> LipschitzPair:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInputError(f"cannot read curve file {path}: {exc}") from exc
    return pair_from_dict(data)
