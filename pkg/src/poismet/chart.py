"""Charts, points, scalar fields and the pluggable differentiation strategy.

Everything downstream evaluates fields through this module's contract: a
field is a deterministic callable over a coordinate list whose entries may
be floats or duals.  ``FORWARD_AD`` differentiates by seeding dual numbers
(nesting gives second and third derivatives); ``CENTRAL_FD`` uses central
differences with steps ``H_FIRST``/``H_SECOND``, shrinking the stencil near
the domain boundary (with a warning) rather than stepping outside the box.
"""

import enum
import random
import warnings
from dataclasses import dataclass, field

from . import expr as expr_mod
from .dual import Dual, tangent, value

H_FIRST = 1e-5
H_SECOND = 1e-4
_H_FLOOR = 1e-12


class FDStepWarning(UserWarning):
    """Central-difference step was shrunk to stay inside the chart domain."""


class DiffStrategy(enum.Enum):
    FORWARD_AD = "ad"
    CENTRAL_FD = "fd"


@dataclass(frozen=True)
class Chart:
    """A single global chart: named coordinates on an axis-aligned box."""

    dimension: int
    coordinate_names: tuple
    domain: tuple
    sample_count: int = 100
    seed: int = 0

    def __post_init__(self):
        n = self.dimension
        if n < 1:
            raise ValueError("chart dimension must be >= 1")
        names = tuple(self.coordinate_names)
        if len(names) != n or len(set(names)) != n:
            raise ValueError("need exactly one distinct name per dimension")
        for name in names:
            if not name.isidentifier():
                raise ValueError(f"coordinate name {name!r} is not a valid identifier")
        box = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if len(box) != n:
            raise ValueError("need one interval per dimension")
        for lo, hi in box:
            if not lo <= hi:
                raise ValueError(f"empty interval [{lo}, {hi}]")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        object.__setattr__(self, "coordinate_names", names)
        object.__setattr__(self, "domain", box)

    def contains(self, coords):
        return all(lo <= value(c) <= hi for c, (lo, hi) in zip(coords, self.domain))

    def point(self, coords):
        p = Point(tuple(float(c) for c in coords))
        if len(p.coords) != self.dimension:
            raise ValueError("wrong number of coordinates")
        if not self.contains(p.coords):
            raise ValueError(f"point {p.coords} outside the chart domain")
        return p

    def sample_points(self, count=None, seed=None):
        """Uniform i.i.d. samples over the box, reproducible from the seed."""
        rng = random.Random(self.seed if seed is None else seed)
        count = self.sample_count if count is None else count
        return [
            tuple(rng.uniform(lo, hi) for lo, hi in self.domain)
            for _ in range(count)
        ]


@dataclass(frozen=True)
class Point:
    coords: tuple


def as_coords(p):
    if isinstance(p, Point):
        return list(p.coords)
    return list(p)


def _fd_step(chart, coords, i, h):
    lo, hi = chart.domain[i]
    x = value(coords[i])
    room = min(x - lo, hi - x)
    if room < h:
        warnings.warn(
            f"central-difference step shrunk from {h} to {max(room, _H_FLOOR)} "
            f"near the boundary of coordinate {chart.coordinate_names[i]}",
            FDStepWarning,
            stacklevel=3,
        )
        h = max(room, _H_FLOOR)
    return h


def partial_callable(fn, coords, i, chart, strategy, h=H_FIRST):
    """d fn / d x_i at ``coords`` for a scalar-valued callable."""
    if strategy is DiffStrategy.FORWARD_AD:
        # every slot must be lifted into the fresh dual level, or nested
        # passes would share a level and mix their perturbations
        bumped = [Dual(c, 1.0 if k == i else 0.0) for k, c in enumerate(coords)]
        return tangent(fn(bumped))
    h = _fd_step(chart, coords, i, h)
    up = list(coords)
    dn = list(coords)
    up[i] = coords[i] + h
    dn[i] = coords[i] - h
    return (fn(up) - fn(dn)) / (2.0 * h)


def second_partial_callable(fn, coords, i, j, chart, strategy, h=H_SECOND):
    """Mixed second partial d^2 fn / d x_i d x_j at ``coords``."""
    if strategy is DiffStrategy.FORWARD_AD:
        bumped = []
        for k, c in enumerate(coords):
            inner = Dual(c, 1.0 if k == j else 0.0)
            bumped.append(Dual(inner, 1.0 if k == i else 0.0))
        return tangent(tangent(fn(bumped)))
    hi = _fd_step(chart, coords, i, h)
    if i == j:
        up = list(coords)
        dn = list(coords)
        up[i] = coords[i] + hi
        dn[i] = coords[i] - hi
        return (fn(up) - 2.0 * fn(list(coords)) + fn(dn)) / (hi * hi)
    hj = _fd_step(chart, coords, j, h)
    pp = list(coords)
    pm = list(coords)
    mp = list(coords)
    mm = list(coords)
    pp[i] += hi
    pp[j] += hj
    pm[i] += hi
    pm[j] -= hj
    mp[i] -= hi
    mp[j] += hj
    mm[i] -= hi
    mm[j] -= hj
    return (fn(pp) - fn(pm) - fn(mp) + fn(mm)) / (4.0 * hi * hj)


def directional_callable(fn, coords, direction, chart, strategy, h=H_FIRST):
    """Directional derivative of a scalar callable along ``direction``."""
    if strategy is DiffStrategy.FORWARD_AD:
        bumped = [Dual(c, d) for c, d in zip(coords, direction)]
        return tangent(fn(bumped))
    scale = max(1.0, max(abs(value(d)) for d in direction))
    s = h / scale
    for i, d in enumerate(direction):
        d = abs(value(d))
        if d > 0.0:
            s = min(s, _fd_step(chart, coords, i, s * d) / d)
    up = [c + s * d for c, d in zip(coords, direction)]
    dn = [c - s * d for c, d in zip(coords, direction)]
    return (fn(up) - fn(dn)) / (2.0 * s)


def tree_map(f, t):
    if isinstance(t, list):
        return [tree_map(f, x) for x in t]
    return f(t)


def tree_map2(f, t, u):
    if isinstance(t, list):
        return [tree_map2(f, a, b) for a, b in zip(t, u)]
    return f(t, u)


def partial_tree(fn, coords, i, chart, strategy, h=H_FIRST):
    """Partial of a callable returning nested lists of scalars."""
    if strategy is DiffStrategy.FORWARD_AD:
        bumped = [Dual(c, 1.0 if k == i else 0.0) for k, c in enumerate(coords)]
        return tree_map(tangent, fn(bumped))
    h = _fd_step(chart, coords, i, h)
    up = list(coords)
    dn = list(coords)
    up[i] = coords[i] + h
    dn[i] = coords[i] - h
    inv = 1.0 / (2.0 * h)
    return tree_map2(lambda a, b: (a - b) * inv, fn(up), fn(dn))


def directional_tree(fn, coords, direction, chart, strategy, h=H_FIRST):
    if strategy is DiffStrategy.FORWARD_AD:
        bumped = [Dual(c, d) for c, d in zip(coords, direction)]
        return tree_map(tangent, fn(bumped))
    scale = max(1.0, max(abs(value(d)) for d in direction))
    s = h / scale
    for i, d in enumerate(direction):
        d = abs(value(d))
        if d > 0.0:
            s = min(s, _fd_step(chart, coords, i, s * d) / d)
    up = [c + s * d for c, d in zip(coords, direction)]
    dn = [c - s * d for c, d in zip(coords, direction)]
    inv = 1.0 / (2.0 * s)
    return tree_map2(lambda a, b: (a - b) * inv, fn(up), fn(dn))


@dataclass
class ScalarField:
    """A real-valued function on the chart, evaluable with two derivatives.

    ``fn`` must accept a coordinate list of floats or duals and be
    deterministic; ``node`` is the parsed expression tree when the field
    came from text, kept for pretty-printing.
    """

    chart: Chart
    fn: object
    strategy: DiffStrategy = DiffStrategy.FORWARD_AD
    node: object = None
    name: str = ""

    @classmethod
    def from_expression(cls, chart, text, strategy=DiffStrategy.FORWARD_AD):
        node = expr_mod.parse(text, chart.coordinate_names)
        return cls(chart, node.compile(), strategy, node, text)

    @classmethod
    def constant(cls, chart, v, strategy=DiffStrategy.FORWARD_AD):
        v = float(v)
        return cls(chart, lambda c: v, strategy, expr_mod.Num(v), str(v))

    @classmethod
    def from_callable(cls, chart, fn, strategy=DiffStrategy.FORWARD_AD, name=""):
        return cls(chart, fn, strategy, None, name)

    def eval(self, p):
        return self.fn(as_coords(p))

    def partial(self, p, i):
        return partial_callable(self.fn, as_coords(p), i, self.chart, self.strategy)

    def second_partial(self, p, i, j):
        return second_partial_callable(self.fn, as_coords(p), i, j, self.chart, self.strategy)

    def directional(self, p, direction):
        return directional_callable(self.fn, as_coords(p), direction, self.chart, self.strategy)

    def pretty(self):
        if self.node is None:
            raise ValueError("field has no expression tree")
        return self.node.pretty()


def parse_expression(text, chart, strategy=DiffStrategy.FORWARD_AD):
    """Parse expression text over the chart coordinates into a ScalarField."""
    return ScalarField.from_expression(chart, text, strategy)


def partial(f, p, i):
    """First partial of a ScalarField at a point, under the field's strategy."""
    return f.partial(p, i)


def second_partial(f, p, i, j):
    """Mixed second partial of a ScalarField at a point."""
    return f.second_partial(p, i, j)
