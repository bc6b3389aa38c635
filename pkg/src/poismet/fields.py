"""Rank-1 and rank-2 component fields over a chart."""

from dataclasses import dataclass

from .chart import DiffStrategy, ScalarField, as_coords


def _as_fields(chart, entries, strategy):
    out = []
    for e in entries:
        if isinstance(e, ScalarField):
            out.append(e)
        elif isinstance(e, str):
            out.append(ScalarField.from_expression(chart, e, strategy))
        else:
            out.append(ScalarField.constant(chart, e, strategy))
    return tuple(out)


@dataclass
class CovectorField:
    """n covariant components alpha_i."""

    chart: object
    components: tuple

    @classmethod
    def from_exprs(cls, chart, entries, strategy=DiffStrategy.FORWARD_AD):
        f = _as_fields(chart, entries, strategy)
        if len(f) != chart.dimension:
            raise ValueError("component count must equal the chart dimension")
        return cls(chart, f)

    @classmethod
    def from_values_callable(cls, chart, values_fn, strategy=DiffStrategy.FORWARD_AD):
        comps = tuple(
            ScalarField.from_callable(chart, (lambda c, k=k: values_fn(c)[k]), strategy)
            for k in range(chart.dimension)
        )
        obj = cls(chart, comps)
        obj._values_fn = values_fn
        return obj

    def values(self, p):
        coords = as_coords(p)
        fn = getattr(self, "_values_fn", None)
        if fn is not None:
            return list(fn(coords))
        return [f.fn(coords) for f in self.components]

    def values_fn(self):
        fn = getattr(self, "_values_fn", None)
        if fn is not None:
            return fn
        comps = self.components
        return lambda coords: [f.fn(coords) for f in comps]

    @property
    def strategy(self):
        return self.components[0].strategy


class VectorField(CovectorField):
    """n contravariant components X^i (same machinery, different variance)."""


def basis_covector(chart, i, strategy=DiffStrategy.FORWARD_AD):
    """The constant coordinate coframe field dx^i."""
    return CovectorField.from_exprs(
        chart, [1.0 if k == i else 0.0 for k in range(chart.dimension)], strategy
    )


def basis_vector(chart, i, strategy=DiffStrategy.FORWARD_AD):
    """The constant coordinate frame field along axis i."""
    return VectorField.from_exprs(
        chart, [1.0 if k == i else 0.0 for k in range(chart.dimension)], strategy
    )


def _as_matrix_fields(chart, rows, strategy):
    n = chart.dimension
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"need a {n}x{n} matrix of components")
    return tuple(_as_fields(chart, row, strategy) for row in rows)


@dataclass
class MetricField:
    """Symmetric nondegenerate covariant components g_ij."""

    chart: object
    components: tuple

    @classmethod
    def from_exprs(cls, chart, rows, strategy=DiffStrategy.FORWARD_AD):
        return cls(chart, _as_matrix_fields(chart, rows, strategy))

    @classmethod
    def identity(cls, chart, strategy=DiffStrategy.FORWARD_AD):
        n = chart.dimension
        return cls.from_exprs(
            chart, [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)], strategy
        )

    def matrix(self, p):
        coords = as_coords(p)
        return [[f.fn(coords) for f in row] for row in self.components]

    def matrix_fn(self):
        comps = self.components
        return lambda coords: [[f.fn(coords) for f in row] for row in comps]

    @property
    def strategy(self):
        return self.components[0][0].strategy


@dataclass
class BivectorField:
    """Antisymmetric contravariant components pi^ij."""

    chart: object
    components: tuple

    @classmethod
    def from_exprs(cls, chart, rows, strategy=DiffStrategy.FORWARD_AD):
        return cls(chart, _as_matrix_fields(chart, rows, strategy))

    @classmethod
    def from_upper(cls, chart, entries, strategy=DiffStrategy.FORWARD_AD):
        """Build from a dict {(i, j): expr} of strictly-upper entries (0-based)."""
        n = chart.dimension
        rows = [["0"] * n for _ in range(n)]
        for (i, j), text in entries.items():
            if not 0 <= i < j < n:
                raise ValueError(f"upper-triangle index expected, got {(i, j)}")
            rows[i][j] = text
            rows[j][i] = f"-({text})" if isinstance(text, str) else -text
        return cls.from_exprs(chart, rows, strategy)

    @classmethod
    def zero(cls, chart, strategy=DiffStrategy.FORWARD_AD):
        n = chart.dimension
        return cls.from_exprs(chart, [["0"] * n for _ in range(n)], strategy)

    @classmethod
    def from_matrix_callable(cls, chart, matrix_fn, strategy=DiffStrategy.FORWARD_AD):
        n = chart.dimension
        comps = tuple(
            tuple(
                ScalarField.from_callable(chart, (lambda c, i=i, j=j: matrix_fn(c)[i][j]), strategy)
                for j in range(n)
            )
            for i in range(n)
        )
        obj = cls(chart, comps)
        obj._matrix_fn = matrix_fn
        return obj

    def matrix(self, p):
        coords = as_coords(p)
        fn = getattr(self, "_matrix_fn", None)
        if fn is not None:
            return [list(row) for row in fn(coords)]
        return [[f.fn(coords) for f in row] for row in self.components]

    def matrix_fn(self):
        fn = getattr(self, "_matrix_fn", None)
        if fn is not None:
            return fn
        comps = self.components
        return lambda coords: [[f.fn(coords) for f in row] for row in comps]

    @property
    def strategy(self):
        return self.components[0][0].strategy


def bivector_sum(a, b):
    """Pointwise sum of two bivector fields on the same chart."""
    fa, fb = a.matrix_fn(), b.matrix_fn()
    n = a.chart.dimension

    def fn(coords):
        ma, mb = fa(coords), fb(coords)
        return [[ma[i][j] + mb[i][j] for j in range(n)] for i in range(n)]

    return BivectorField.from_matrix_callable(a.chart, fn, a.strategy)
