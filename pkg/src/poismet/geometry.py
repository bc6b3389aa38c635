"""Musical maps, the intertwining endomorphisms, Koszul and Schouten brackets.

Index conventions (fixed for the whole package): pi(alpha, beta) =
pi^ij alpha_i beta_j with pi^ij = pi(dx^i, dx^j); (#_pi alpha)^j =
alpha_i pi^ij, so beta(#_pi alpha) = pi(alpha, beta); (#_g alpha)^i =
g^ij alpha_j and (b_g X)_i = g_ij X^j; (J alpha)_i = g_ik pi^jk alpha_j,
which realizes pi(alpha, beta) = g~(J alpha, beta); Jt = #_g o J o b_g.
"""

from dataclasses import dataclass, field

from .chart import DiffStrategy, as_coords, directional_tree, partial_callable, partial_tree
from .dual import value
from .fields import BivectorField, CovectorField, VectorField, basis_covector, bivector_sum
from .frames import Frame
from .linalg import det_value
from .report import ResidualReport

_FRAME_CACHE_MAX = 4096


@dataclass
class Geometry:
    """A chart together with a metric and a bivector field.

    Treated as immutable after construction; evaluation is pure, so the
    same geometry may be swept from many threads.
    """

    chart: object
    g: object
    pi: object
    eps_g: float = 1e-10
    eps_pi: float = 1e-10
    _frames: dict = field(default_factory=dict, repr=False)

    @property
    def strategy(self):
        return self.g.strategy

    @property
    def n(self):
        return self.chart.dimension

    def frame(self, p):
        coords = as_coords(p)
        if all(type(c) is float for c in coords):
            key = tuple(coords)
            fr = self._frames.get(key)
            if fr is None:
                fr = Frame(self, coords)
                if len(self._frames) >= _FRAME_CACHE_MAX:
                    self._frames.clear()
                self._frames[key] = fr
            return fr
        return Frame(self, coords)

    def sample_points(self, count=None, seed=None):
        return self.chart.sample_points(count=count, seed=seed)


def covector_values(alpha, p):
    if isinstance(alpha, CovectorField):
        return alpha.values(p)
    return list(alpha)


def validate_geometry(geom, sym_tol=1e-12, inv_tol=1e-10, samples=None):
    """Check metric symmetry, bivector antisymmetry, the nondegeneracy floor
    and that the cached cometric inverts the metric at the sample points."""
    pts = geom.sample_points(count=samples)
    rep = ResidualReport(
        "geometry-validation",
        seed=geom.chart.seed,
        sample_count=len(pts),
        strategy=geom.strategy.value,
    )
    n = geom.n
    sym = asym = inv = 0.0
    min_det = float("inf")
    for p in pts:
        fr = geom.frame(p)
        gm, pm = fr.g, fr.pi
        for i in range(n):
            for j in range(n):
                sym = max(sym, abs(value(gm[i][j]) - value(gm[j][i])))
                asym = max(asym, abs(value(pm[i][j]) + value(pm[j][i])))
        min_det = min(min_det, abs(fr.det_g))
        ident = [[sum(fr.ginv[i][k] * gm[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        for i in range(n):
            for j in range(n):
                inv = max(inv, abs(value(ident[i][j]) - (1.0 if i == j else 0.0)))
    rep.add("metric_symmetry", sym, sym_tol)
    rep.add("bivector_antisymmetry", asym, sym_tol)
    rep.add_flag("metric_nondegenerate", min_det > geom.eps_g, note=f"min |det g| = {min_det:.3e}")
    rep.add("cometric_inverts_metric", inv, inv_tol)
    return rep


# -- musical maps and endomorphisms -----------------------------------------


def sharp_pi(geom, alpha, p):
    """(#_pi alpha)^j = alpha_i pi^ij at p."""
    return geom.frame(p).sharp_pi_vec(covector_values(alpha, p))


def sharp_g(geom, alpha, p):
    return geom.frame(p).sharp_g_vec(covector_values(alpha, p))


def flat_g(geom, x, p):
    return geom.frame(p).flat_g_vec(covector_values(x, p))


def cometric(geom, alpha, beta, p):
    return geom.frame(p).cometric_pair(covector_values(alpha, p), covector_values(beta, p))


def j_covector(geom, alpha, p):
    """J on covectors: (J alpha)_i = g_ik pi^jk alpha_j."""
    fr = geom.frame(p)
    a = covector_values(alpha, p)
    n = geom.n
    return [sum(fr.jmat[i][j] * a[j] for j in range(n)) for i in range(n)]


def j_vector(geom, x, p):
    """Jt on vectors, the #_g-conjugate of J."""
    fr = geom.frame(p)
    xv = covector_values(x, p)
    n = geom.n
    return [sum(fr.jt[i][j] * xv[j] for j in range(n)) for i in range(n)]


def j_covector_field(geom, beta):
    """J beta materialized as a genuine covector field."""
    bfn = beta.values_fn()
    gfn = geom.g.matrix_fn()
    pfn = geom.pi.matrix_fn()
    n = geom.n

    def values(coords):
        g = gfn(coords)
        pi = pfn(coords)
        b = bfn(coords)
        return [
            sum(g[i][k] * pi[j][k] * b[j] for j in range(n) for k in range(n)) for i in range(n)
        ]

    return CovectorField.from_values_callable(geom.chart, values, geom.strategy)


def sharp_pi_field(geom, alpha, bivector=None):
    """#_pi alpha materialized as a vector field (optionally for another bivector)."""
    afn = alpha.values_fn()
    pfn = (bivector or geom.pi).matrix_fn()
    n = geom.n

    def values(coords):
        a = afn(coords)
        pi = pfn(coords)
        return [sum(a[i] * pi[i][j] for i in range(n)) for j in range(n)]

    return VectorField.from_values_callable(geom.chart, values, geom.strategy)


def sharp_g_field(geom, alpha):
    afn = alpha.values_fn()
    gfn = geom.g.matrix_fn()
    n = geom.n

    def values(coords):
        a = afn(coords)
        from .linalg import mat_solve

        return mat_solve(gfn(coords), a)

    return VectorField.from_values_callable(geom.chart, values, geom.strategy)


# -- brackets ----------------------------------------------------------------


def lie_derivative_oneform(x, beta, p, chart=None, strategy=None):
    """(L_X beta)_i = X^j d_j beta_i + beta_j d_i X^j at p."""
    chart = chart or x.chart
    strategy = strategy or x.strategy
    coords = as_coords(p)
    n = chart.dimension
    xv = x.values(coords)
    bfn = beta.values_fn()
    xfn = x.values_fn()
    d_beta = directional_tree(bfn, coords, xv, chart, strategy)
    dX = [partial_tree(xfn, coords, i, chart, strategy) for i in range(n)]
    bv = beta.values(coords)
    return [d_beta[i] + sum(bv[j] * dX[i][j] for j in range(n)) for i in range(n)]


def lie_bracket_vectors(x, y, p, chart=None, strategy=None):
    """[X, Y]^q = X^m d_m Y^q - Y^m d_m X^q at p."""
    chart = chart or x.chart
    strategy = strategy or x.strategy
    coords = as_coords(p)
    xv = x.values(coords)
    yv = y.values(coords)
    dy = directional_tree(y.values_fn(), coords, xv, chart, strategy)
    dx = directional_tree(x.values_fn(), coords, yv, chart, strategy)
    return [dy[q] - dx[q] for q in range(chart.dimension)]


def _pairing_field(geom, bivector, alpha, beta):
    """The scalar field q -> pi(alpha, beta)(q) for the given bivector."""
    afn = alpha.values_fn()
    bfn = beta.values_fn()
    pfn = bivector.matrix_fn()
    n = geom.n

    def fn(coords):
        a = afn(coords)
        b = bfn(coords)
        pi = pfn(coords)
        return sum(pi[i][j] * a[i] * b[j] for i in range(n) for j in range(n))

    return fn


def koszul_bracket(geom, alpha, beta, p, bivector=None):
    """[alpha, beta] = L_{#alpha} beta - L_{#beta} alpha - d(pi(alpha, beta))."""
    bivector = bivector or geom.pi
    coords = as_coords(p)
    xa = sharp_pi_field(geom, alpha, bivector)
    xb = sharp_pi_field(geom, beta, bivector)
    t1 = lie_derivative_oneform(xa, beta, coords, geom.chart, geom.strategy)
    t2 = lie_derivative_oneform(xb, alpha, coords, geom.chart, geom.strategy)
    pair = _pairing_field(geom, bivector, alpha, beta)
    n = geom.n
    d3 = [partial_callable(pair, coords, i, geom.chart, geom.strategy) for i in range(n)]
    return [t1[i] - t2[i] - d3[i] for i in range(n)]


def schouten_self(geom, alpha, beta, gamma, p, bivector=None):
    """Schouten self-bracket evaluated on three 1-form fields:
    gamma applied to (#[alpha, beta] - [#alpha, #beta])."""
    bivector = bivector or geom.pi
    coords = as_coords(p)
    mu = koszul_bracket(geom, alpha, beta, coords, bivector)
    pi = bivector.matrix(coords)
    n = geom.n
    v1 = [sum(mu[i] * pi[i][j] for i in range(n)) for j in range(n)]
    xa = sharp_pi_field(geom, alpha, bivector)
    xb = sharp_pi_field(geom, beta, bivector)
    v2 = lie_bracket_vectors(xa, xb, coords, geom.chart, geom.strategy)
    gv = gamma.values(coords)
    return sum(gv[q] * (v1[q] - v2[q]) for q in range(n))


def schouten_mixed(geom, p_biv, q_biv, alpha, beta, gamma, p):
    """Polarization: [P, Q] = ((P+Q self) - (P self) - (Q self)) / 2."""
    s_sum = schouten_self(geom, alpha, beta, gamma, p, bivector=bivector_sum(p_biv, q_biv))
    s_p = schouten_self(geom, alpha, beta, gamma, p, bivector=p_biv)
    s_q = schouten_self(geom, alpha, beta, gamma, p, bivector=q_biv)
    return 0.5 * (s_sum - s_p - s_q)


def is_poisson(geom, tol=1e-8, samples=None, bivector=None):
    """Max |Schouten self-bracket| over basis triples and sample points."""
    pts = geom.sample_points(count=samples)
    rep = ResidualReport(
        "poisson-integrability",
        seed=geom.chart.seed,
        sample_count=len(pts),
        strategy=geom.strategy.value,
    )
    n = geom.n
    basis = [basis_covector(geom.chart, i, geom.strategy) for i in range(n)]
    worst = 0.0
    for p in pts:
        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    s = schouten_self(geom, basis[i], basis[j], basis[k], p, bivector=bivector)
                    worst = max(worst, abs(value(s)))
    note = "dimension < 3: every bivector is trivially integrable" if n < 3 else ""
    rep.add("schouten_self_max", worst, tol, note=note)
    return rep


def bivector_invertible(geom, samples=None):
    """True when |det pi| stays above the floor on the sample sweep."""
    pts = geom.sample_points(count=samples)
    return all(abs(det_value(geom.pi.matrix(p))) > geom.eps_pi for p in pts)
