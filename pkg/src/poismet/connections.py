"""The two contravariant derivatives, their identity suite, compatibility
residuals, and parallel transport along cotangent curves.

The first derivative pulls the Levi-Civita connection back through the
anchor (#_pi); the second is the torsion-free metric one solved from the
six-term Koszul-type formula against the coordinate coframe and lowered
with g.  Both are connections over the same anchor, so they agree on the
derivative term and differ only in their coefficient tables.
"""

import math
from dataclasses import dataclass

from .chart import (
    Chart,
    DiffStrategy,
    ScalarField,
    as_coords,
    directional_tree,
    partial_tree,
)
from .dual import value
from .errors import AnchorViolation, DegeneratePoisson
from .fields import basis_covector
from .frames import Frame
from .geometry import (
    covector_values,
    j_covector,
    j_covector_field,
    koszul_bracket,
    sharp_pi_field,
)
from .linalg import det_value, mat_inv, mat_solve, transpose
from .report import ResidualReport

COMPAT_TOL = {DiffStrategy.FORWARD_AD: 1e-7, DiffStrategy.CENTRAL_FD: 1e-4}
SUITE_TOL = {DiffStrategy.FORWARD_AD: 1e-6, DiffStrategy.CENTRAL_FD: 1e-3}
EPS_ANCHOR = 1e-6
TRANSPORT_STEPS = 256


def christoffel(geom, p):
    """Levi-Civita coefficients Gamma^k_ij at p (index order [k][i][j])."""
    return geom.frame(p).gamma


def contravariant_christoffels(geom, p):
    """Coefficients of the metric contravariant derivative on the coframe,
    index order [i][j][k] for the k-th component on (dx^i, dx^j)."""
    return geom.frame(p).dco


def nabla_cov_covector(geom, x, beta, p):
    """Levi-Civita derivative of a covector field along the vector x at p."""
    fr = geom.frame(p)
    coords = as_coords(p)
    xv = covector_values(x, coords)
    n = geom.n
    dbeta = directional_tree(beta.values_fn(), coords, xv, geom.chart, geom.strategy)
    bv = beta.values(coords)
    ga = fr.gamma
    return [
        dbeta[i] - sum(xv[j] * ga[k][j][i] * bv[k] for j in range(n) for k in range(n))
        for i in range(n)
    ]


def _apply_connection(geom, table_name, alpha, beta, p):
    fr = geom.frame(p)
    coords = as_coords(p)
    a = alpha.values(coords)
    b = beta.values(coords)
    anchor = fr.sharp_pi_vec(a)
    dbeta = directional_tree(beta.values_fn(), coords, anchor, geom.chart, geom.strategy)
    co = getattr(fr, table_name)
    n = geom.n
    return [
        dbeta[k] + sum(a[i] * b[j] * co[i][j][k] for i in range(n) for j in range(n))
        for k in range(n)
    ]


def anchored_nabla(geom, alpha, beta, p):
    """Levi-Civita derivative of beta along the anchor of alpha."""
    return _apply_connection(geom, "nco", alpha, beta, p)


def contravariant_lc(geom, alpha, beta, p):
    """The torsion-free metric contravariant derivative of beta along alpha."""
    return _apply_connection(geom, "dco", alpha, beta, p)


def torsion(geom, alpha, beta, p):
    """Torsion of the anchored derivative against the Koszul bracket."""
    mu = koszul_bracket(geom, alpha, beta, p)
    ab = anchored_nabla(geom, alpha, beta, p)
    ba = anchored_nabla(geom, beta, alpha, p)
    return [mu[k] - (ab[k] - ba[k]) for k in range(geom.n)]


def symmetrized_nabla(geom, alpha, beta, p):
    """The torsion-free symmetrization of the anchored derivative."""
    ab = anchored_nabla(geom, alpha, beta, p)
    t = torsion(geom, alpha, beta, p)
    return [ab[k] + 0.5 * t[k] for k in range(geom.n)]


def connection_gap(geom, alpha, beta, p):
    """Difference between the symmetrized anchored derivative and the metric one."""
    s = symmetrized_nabla(geom, alpha, beta, p)
    d = contravariant_lc(geom, alpha, beta, p)
    return [s[k] - d[k] for k in range(geom.n)]


def _endo_derivative(geom, apply_op, alpha, beta, p):
    jb = j_covector_field(geom, beta)
    t1 = apply_op(geom, alpha, jb, p)
    t2 = j_covector(geom, apply_op(geom, alpha, beta, p), p)
    return [t1[k] - t2[k] for k in range(geom.n)]


def anchored_nabla_of_j(geom, alpha, beta, p):
    """(nabla_alpha J)(beta) = nabla_alpha(J beta) - J(nabla_alpha beta)."""
    return _endo_derivative(geom, anchored_nabla, alpha, beta, p)


def contravariant_lc_of_j(geom, alpha, beta, p):
    """(D_alpha J)(beta) = D_alpha(J beta) - J(D_alpha beta)."""
    return _endo_derivative(geom, contravariant_lc, alpha, beta, p)


def compat_residuals(geom, tol=None, which="both", samples=None):
    """Max cometric norm of the J-derivative over coframe pairs and samples,
    once per compatibility notion."""
    tol = COMPAT_TOL[geom.strategy] if tol is None else tol
    pts = geom.sample_points(count=samples)
    rep = ResidualReport(
        "compatibility",
        seed=geom.chart.seed,
        sample_count=len(pts),
        strategy=geom.strategy.value,
    )
    n = geom.n
    worst_n = worst_d = 0.0
    for p in pts:
        fr = geom.frame(p)
        if which in ("nabla", "both"):
            nj = fr.nj_endo
            for i in range(n):
                for j in range(n):
                    worst_n = max(worst_n, fr.cometric_norm(nj[i][j]))
        if which in ("d", "both"):
            dj = fr.dj_endo
            for i in range(n):
                for j in range(n):
                    worst_d = max(worst_d, fr.cometric_norm(dj[i][j]))
    if which in ("nabla", "both"):
        rep.add("nabla_compat", worst_n, tol)
    if which in ("d", "both"):
        rep.add("d_compat", worst_d, tol)
    return rep


def _schouten_table(fr):
    """Schouten self-bracket on basis triples, assembled from the bracket
    formula: gamma[# of koszul - commutator of anchors]."""
    n, pi, dpi = fr.n, fr.pi, fr.dpi
    out = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                t1 = sum(dpi[m][i][j] * pi[m][k] for m in range(n))
                t2 = sum(pi[i][m] * dpi[m][j][k] - pi[j][m] * dpi[m][i][k] for m in range(n))
                out[i][j][k] = t1 - t2
    return out


def connection_identity_suite(geom, tol=None, samples=None):
    """Five named residuals tying the two derivatives, their torsion, the
    Schouten bracket and the gap tensor together; all are theorems, so the
    residuals certify the implementation."""
    tol = SUITE_TOL[geom.strategy] if tol is None else tol
    pts = geom.sample_points(count=samples)
    rep = ResidualReport(
        "connection-identities",
        seed=geom.chart.seed,
        sample_count=len(pts),
        strategy=geom.strategy.value,
    )
    n = geom.n
    r_metric = r_torsion = r_schouten = r_gap = r_pairing = 0.0
    for p in pts:
        fr = geom.frame(p)
        pi, ginv, g = fr.pi, fr.ginv, fr.g
        dginv, dco, nco = fr.dginv, fr.dco, fr.nco
        kos, jm = fr.kos, fr.jmat
        dj, nj = fr.dj_endo, fr.nj_endo
        covjt = fr.cov_jt

        # metricity of both derivatives
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lead = sum(pi[i][m] * dginv[m][j][k] for m in range(n))
                    for co in (dco, nco):
                        got = lead - sum(
                            co[i][j][l] * ginv[l][k] + co[i][k][l] * ginv[l][j] for l in range(n)
                        )
                        r_metric = max(r_metric, abs(value(got)))

        # torsion: the metric derivative has none; the anchored one has the
        # stated pairing with the covariant derivative of Jt
        tors = [
            [[kos[i][j][l] - (nco[i][j][l] - nco[j][i][l]) for l in range(n)] for j in range(n)]
            for i in range(n)
        ]
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    r_torsion = max(
                        r_torsion, abs(value(kos[i][j][l] - (dco[i][j][l] - dco[j][i][l])))
                    )
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = sum(tors[i][j][l] * ginv[l][k] for l in range(n))
                    rhs = sum(
                        ginv[k][m] * covjt[m][j][b] * ginv[i][b]
                        for m in range(n)
                        for b in range(n)
                    )
                    r_torsion = max(r_torsion, abs(value(lhs - rhs)))

        # both expressions for the Schouten bracket
        sch = _schouten_table(fr)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    dform = 0.5 * sum(
                        ginv[i][b] * dj[k][j][b]
                        + ginv[j][b] * dj[i][k][b]
                        + ginv[k][b] * dj[j][i][b]
                        for b in range(n)
                    )
                    nform = sum(
                        ginv[i][b] * nj[k][j][b]
                        + ginv[j][b] * nj[i][k][b]
                        + ginv[k][b] * nj[j][i][b]
                        for b in range(n)
                    )
                    r_schouten = max(
                        r_schouten,
                        abs(value(sch[i][j][k] - dform)),
                        abs(value(sch[i][j][k] - nform)),
                    )

        # gap between the symmetrized anchored derivative and the metric one
        gap = [
            [
                [
                    nco[i][j][l] + 0.5 * tors[i][j][l] - dco[i][j][l]
                    for l in range(n)
                ]
                for j in range(n)
            ]
            for i in range(n)
        ]

        def phi_vec(i, j):
            return [
                sum(ginv[i][m] * covjt[m][a][b] * ginv[j][b] for m in range(n) for b in range(n))
                for a in range(n)
            ]

        for i in range(n):
            for j in range(n):
                v1 = phi_vec(i, j)
                v2 = phi_vec(j, i)
                for l in range(n):
                    rhs = 0.5 * sum(g[l][a] * (v1[a] + v2[a]) for a in range(n))
                    r_gap = max(r_gap, abs(value(gap[i][j][l] - rhs)))

        # pairing identity between the two J-derivatives, the Schouten
        # bracket and the gap tensor (J applied covector-side)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lhs = (
                        sum(
                            (dj[i][j][b] - 0.5 * nj[i][j][b]) * ginv[b][k] for b in range(n)
                        )
                        + 0.5 * sch[i][j][k]
                    )
                    rhs = sum(
                        ginv[a][b] * (gap[i][k][a] * jm[b][j] - gap[i][j][a] * jm[b][k])
                        for a in range(n)
                        for b in range(n)
                    )
                    r_pairing = max(r_pairing, abs(value(lhs - rhs)))

    rep.add("metricity", r_metric, tol)
    rep.add("torsion", r_torsion, tol)
    rep.add("schouten_expressions", r_schouten, tol)
    rep.add("connection_difference", r_gap, tol)
    rep.add("gap_pairing_identity", r_pairing, tol)
    return rep


# -- the invertible-bivector route -------------------------------------------


def pullback_metric_fn(geom):
    """Vector-side metric h(u, v) = g(Jt^-1 u, Jt^-1 v) as a matrix callable."""
    gfn = geom.g.matrix_fn()
    pfn = geom.pi.matrix_fn()
    n = geom.n

    def fn(coords):
        g = gfn(coords)
        pi = pfn(coords)
        jt = [[sum(pi[k][i] * g[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
        kinv = mat_inv(jt)
        return [
            [
                sum(g[a][b] * kinv[a][i] * kinv[b][j] for a in range(n) for b in range(n))
                for j in range(n)
            ]
            for i in range(n)
        ]

    return fn


def contravariant_lc_pullback_route(geom, alpha, beta, p):
    """Independent route for the metric contravariant derivative when the
    bivector is invertible: push both forms through the anchor, take the
    Levi-Civita derivative of the pulled-back vector metric, pull back."""
    coords = as_coords(p)
    fr = geom.frame(p)
    if abs(fr.det_pi) <= geom.eps_pi:
        raise DegeneratePoisson(f"|det pi| = {abs(fr.det_pi):.3e} at {tuple(coords)}")
    n = geom.n
    hfn = pullback_metric_fn(geom)
    h = hfn(coords)
    dh = [partial_tree(hfn, coords, m, geom.chart, geom.strategy) for m in range(n)]
    hinv = mat_inv(h)
    gamma_h = [[[0.0] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            combo = [dh[i][j][l] + dh[j][i][l] - dh[l][i][j] for l in range(n)]
            for k in range(n):
                v = 0.5 * sum(hinv[k][l] * combo[l] for l in range(n))
                gamma_h[k][i][j] = v
                gamma_h[k][j][i] = v
    a = alpha.values(coords)
    x = fr.sharp_pi_vec(a)
    y_field = sharp_pi_field(geom, beta)
    yv = y_field.values(coords)
    dy = directional_tree(y_field.values_fn(), coords, x, geom.chart, geom.strategy)
    w = [
        dy[i] + sum(gamma_h[i][m][k] * x[m] * yv[k] for m in range(n) for k in range(n))
        for i in range(n)
    ]
    return mat_solve(transpose(fr.pi), w)


def pullback_route_report(geom, tol=1e-6, samples=None):
    """Agreement between the solved-coframe derivative and the pullback route
    on all coframe pairs (complete: connections over the same anchor agree
    when they agree on the coframe)."""
    pts = geom.sample_points(count=samples)
    rep = ResidualReport(
        "pullback-route",
        seed=geom.chart.seed,
        sample_count=len(pts),
        strategy=geom.strategy.value,
    )
    n = geom.n
    basis = [basis_covector(geom.chart, i, geom.strategy) for i in range(n)]
    worst = 0.0
    for p in pts:
        fr = geom.frame(p)
        dco = fr.dco
        for i in range(n):
            for j in range(n):
                via = contravariant_lc_pullback_route(geom, basis[i], basis[j], p)
                for k in range(n):
                    worst = max(worst, abs(value(dco[i][j][k] - via[k])))
    rep.add("pullback_route_agreement", worst, tol)
    return rep


# -- cotangent transport -----------------------------------------------------


def _time_chart():
    return Chart(1, ("t",), ((0.0, 1.0),), sample_count=16, seed=0)


@dataclass
class CotangentCurve:
    """A curve in the chart paired with a covector leg whose anchor image
    is the curve velocity."""

    gamma: tuple
    alpha: tuple

    @classmethod
    def from_exprs(cls, gamma_exprs, alpha_exprs, strategy=DiffStrategy.FORWARD_AD):
        tch = _time_chart()
        gam = tuple(ScalarField.from_expression(tch, e, strategy) for e in gamma_exprs)
        alp = tuple(ScalarField.from_expression(tch, e, strategy) for e in alpha_exprs)
        if len(gam) != len(alp):
            raise ValueError("curve and covector legs need matching dimensions")
        return cls(gam, alp)

    @classmethod
    def from_gamma(cls, geom, gamma_exprs, strategy=None):
        """Derive the covector leg by inverting the anchor along the curve;
        requires the bivector to be invertible there."""
        strategy = strategy or geom.strategy
        tch = _time_chart()
        gam = tuple(ScalarField.from_expression(tch, e, strategy) for e in gamma_exprs)
        pfn = geom.pi.matrix_fn()
        n = geom.n

        def alpha_values(tc):
            pt = [f.fn(tc) for f in gam]
            vel = [
                directional_tree(lambda c, f=f: [f.fn(c)], tc, [1.0], tch, strategy)[0]
                for f in gam
            ]
            pi = pfn(pt)
            if abs(det_value(pi)) <= geom.eps_pi:
                raise DegeneratePoisson("bivector not invertible along the curve")
            return mat_solve(transpose(pi), vel)

        alp = tuple(
            ScalarField.from_callable(tch, (lambda tc, k=k: alpha_values(tc)[k]), strategy)
            for k in range(n)
        )
        return cls(gam, alp)

    @property
    def dimension(self):
        return len(self.gamma)

    def point_at(self, t):
        return [f.fn([t]) for f in self.gamma]

    def alpha_at(self, t):
        return [f.fn([t]) for f in self.alpha]

    def velocity_at(self, t):
        return [f.partial([t], 0) for f in self.gamma]


def anchor_residual(geom, curve, nodes=33):
    """Max relative gap between the anchored covector leg and the velocity."""
    worst = 0.0
    for k in range(nodes):
        t = k / (nodes - 1)
        pt = curve.point_at(t)
        vel = [value(v) for v in curve.velocity_at(t)]
        pi = geom.pi.matrix(pt)
        a = curve.alpha_at(t)
        img = [value(sum(a[i] * pi[i][j] for i in range(geom.n))) for j in range(geom.n)]
        scale = 1.0 + max(abs(v) for v in vel)
        gap = max(abs(img[j] - vel[j]) for j in range(geom.n))
        worst = max(worst, gap / scale)
    return worst


def cotangent_transport(geom, curve, beta0, steps=TRANSPORT_STEPS, eps_anchor=EPS_ANCHOR,
                        check_anchor=True):
    """Parallel transport for the metric contravariant derivative: integrate
    d beta_k/dt + co[i][j][k](gamma(t)) alpha_i(t) beta_j(t) = 0 with the
    classical 4th-order one-step method on ``steps`` uniform steps."""
    n = geom.n
    if check_anchor:
        res = anchor_residual(geom, curve, nodes=min(steps + 1, 65))
        if res > eps_anchor:
            raise AnchorViolation(f"anchor residual {res:.3e} exceeds {eps_anchor:.1e}")
    beta = [float(b) for b in beta0]

    def rhs(t, b):
        pt = [value(c) for c in curve.point_at(t)]
        a = [value(x) for x in curve.alpha_at(t)]
        dco = geom.frame(pt).dco
        return [
            -sum(a[i] * b[j] * value(dco[i][j][k]) for i in range(n) for j in range(n))
            for k in range(n)
        ]

    h = 1.0 / steps
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, beta)
        k2 = rhs(t + 0.5 * h, [beta[i] + 0.5 * h * k1[i] for i in range(n)])
        k3 = rhs(t + 0.5 * h, [beta[i] + 0.5 * h * k2[i] for i in range(n)])
        k4 = rhs(t + h, [beta[i] + h * k3[i] for i in range(n)])
        beta = [
            beta[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0 for i in range(n)
        ]
        t += h
    return beta


def transport_convergence_order(geom, curve, beta0, steps=(32, 64, 128)):
    """Observed order from successive step halvings (Richardson pairs)."""
    outs = [cotangent_transport(geom, curve, beta0, steps=s) for s in steps]
    e1 = max(abs(a - b) for a, b in zip(outs[0], outs[1]))
    e2 = max(abs(a - b) for a, b in zip(outs[1], outs[2]))
    if e2 == 0.0:
        return float("inf")
    return math.log2(e1 / e2)


def transport_report(geom, curve, beta0, steps=TRANSPORT_STEPS, tol=1e-6):
    """Isometry and J-commutation diagnostics for one transported covector."""
    rep = ResidualReport(
        "cotangent-transport",
        seed=geom.chart.seed,
        sample_count=steps,
        strategy=geom.strategy.value,
    )
    res = anchor_residual(geom, curve)
    rep.add("anchor", res, EPS_ANCHOR)
    if res > EPS_ANCHOR:
        return rep
    p0 = [value(c) for c in curve.point_at(0.0)]
    p1 = [value(c) for c in curve.point_at(1.0)]
    fr0 = geom.frame(p0)
    fr1 = geom.frame(p1)
    beta1 = cotangent_transport(geom, curve, beta0, steps=steps, check_anchor=False)
    n0 = value(fr0.cometric_pair(beta0, beta0))
    n1 = value(fr1.cometric_pair(beta1, beta1))
    rep.add("isometry_drift", abs(n1 - n0), tol)
    jb0 = j_covector(geom, beta0, p0)
    tj = cotangent_transport(geom, curve, jb0, steps=steps, check_anchor=False)
    jt1 = j_covector(geom, beta1, p1)
    rep.add("j_commutation", max(abs(value(a) - value(b)) for a, b in zip(tj, jt1)), tol)
    order = transport_convergence_order(geom, curve, beta0)
    rep.add_flag("convergence_order", order >= 3.5, note=f"measured order {order:.2f}")
    return rep
