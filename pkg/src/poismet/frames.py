"""Per-point coefficient tables shared by the connection and curvature code.

A ``Frame`` evaluates the metric and bivector components (and their
derivatives) once at a point and derives every coefficient table the rest
of the package needs.  The tables are plain nested lists over generic
scalars, so a frame built at dual-valued coordinates yields the derivative
of any table through the same code path.

Index conventions, fixed package-wide:

* ``pi[i][j]``   = pi(dx^i, dx^j); the sharp map is (#alpha)^j = alpha_i pi[i][j]
* ``jmat[i][j]`` : (J alpha)_i = jmat[i][j] alpha_j  with jmat[i][j] = g_ik pi^jk
* ``jt[i][j]``   : (Jt X)^i = jt[i][j] X^j           with jt[i][j]  = pi^ki g_kj
* ``gamma[k][i][j]`` = Gamma^k_ij of the Levi-Civita connection
* ``dco[i][j][k]``   = k-th component of the torsion-free metric contravariant
  derivative of dx^j along dx^i (solved against the coframe, lowered with g)
* ``nco[i][j][k]``   = same for the Levi-Civita derivative along the anchor
* ``riem[l][i][j][k]`` = R^l_ijk with R(e_i,e_j)e_k = nabla_i nabla_j - ...
* ``curv[i][j][l][k]`` = k-th component of the contravariant curvature
  operator on (dx^i, dx^j) applied to dx^l, with the sign convention
  R(a,b) = D_[a,b] - (D_a D_b - D_b D_a).
"""

from functools import cached_property

from .chart import (
    partial_callable,
    partial_tree,
    second_partial_callable,
)
from .dual import value
from .errors import DegenerateMetric
from .linalg import det_value, mat_inv


class Frame:
    def __init__(self, geom, coords):
        self.geom = geom
        self.coords = list(coords)
        self.n = geom.chart.dimension

    def _partial_matrix(self, matrix_fn):
        ch = self.geom.chart
        st = self.geom.strategy
        return [partial_tree(matrix_fn, self.coords, m, ch, st) for m in range(self.n)]

    @cached_property
    def g(self):
        return self.geom.g.matrix(self.coords)

    @cached_property
    def dg(self):
        return self._partial_matrix(self.geom.g.matrix_fn())

    @cached_property
    def pi(self):
        return self.geom.pi.matrix(self.coords)

    @cached_property
    def dpi(self):
        return self._partial_matrix(self.geom.pi.matrix_fn())

    @cached_property
    def det_g(self):
        return det_value(self.g)

    @cached_property
    def det_pi(self):
        return det_value(self.pi)

    @cached_property
    def ginv(self):
        if abs(self.det_g) <= self.geom.eps_g:
            raise DegenerateMetric(
                f"|det g| = {abs(self.det_g):.3e} at {tuple(value(c) for c in self.coords)}"
            )
        return mat_inv(self.g)

    @cached_property
    def dginv(self):
        # d(g^-1) = -g^-1 (dg) g^-1
        n, ginv = self.n, self.ginv
        out = []
        for m in range(self.n):
            dgm = self.dg[m]
            left = [[sum(ginv[i][a] * dgm[a][b] for a in range(n)) for b in range(n)] for i in range(n)]
            out.append(
                [[-sum(left[i][b] * ginv[b][j] for b in range(n)) for j in range(n)] for i in range(n)]
            )
        return out

    @cached_property
    def gamma(self):
        n, ginv, dg = self.n, self.ginv, self.dg
        out = [[[0.0] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                combo = [dg[i][j][l] + dg[j][i][l] - dg[l][i][j] for l in range(n)]
                for k in range(n):
                    v = 0.5 * sum(ginv[k][l] * combo[l] for l in range(n))
                    out[k][i][j] = v
                    out[k][j][i] = v
        return out

    @cached_property
    def jmat(self):
        n, g, pi = self.n, self.g, self.pi
        return [[sum(g[i][k] * pi[j][k] for k in range(n)) for j in range(n)] for i in range(n)]

    @cached_property
    def djmat(self):
        n, g, pi, dg, dpi = self.n, self.g, self.pi, self.dg, self.dpi
        return [
            [
                [
                    sum(dg[m][i][k] * pi[j][k] + g[i][k] * dpi[m][j][k] for k in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
            for m in range(n)
        ]

    @cached_property
    def jt(self):
        n, g, pi = self.n, self.g, self.pi
        return [[sum(pi[k][i] * g[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    @cached_property
    def djt(self):
        n, g, pi, dg, dpi = self.n, self.g, self.pi, self.dg, self.dpi
        return [
            [
                [
                    sum(dpi[m][k][i] * g[k][j] + pi[k][i] * dg[m][k][j] for k in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
            for m in range(n)
        ]

    @cached_property
    def cov_jt(self):
        # (nabla_m Jt)^i_j, the covariant derivative of the (1,1) field Jt
        n, ga, jt, djt = self.n, self.gamma, self.jt, self.djt
        return [
            [
                [
                    djt[m][i][j]
                    + sum(ga[i][m][k] * jt[k][j] for k in range(n))
                    - sum(jt[i][k] * ga[k][m][j] for k in range(n))
                    for j in range(n)
                ]
                for i in range(n)
            ]
            for m in range(n)
        ]

    @cached_property
    def kos(self):
        # Koszul bracket of coframe fields: ([dx^i, dx^j])_m = d_m pi^ij
        n, dpi = self.n, self.dpi
        return [[[dpi[m][i][j] for m in range(n)] for j in range(n)] for i in range(n)]

    @cached_property
    def dco(self):
        n = self.n
        pi, dginv, dpi, ginv, g = self.pi, self.dginv, self.dpi, self.ginv, self.g
        out = [[[0.0] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                rhs = [
                    sum(
                        pi[i][m] * dginv[m][j][k]
                        + pi[j][m] * dginv[m][i][k]
                        - pi[k][m] * dginv[m][i][j]
                        + dpi[m][k][i] * ginv[m][j]
                        + dpi[m][k][j] * ginv[m][i]
                        + dpi[m][i][j] * ginv[m][k]
                        for m in range(n)
                    )
                    for k in range(n)
                ]
                for l in range(n):
                    out[i][j][l] = 0.5 * sum(g[l][k] * rhs[k] for k in range(n))
        return out

    @cached_property
    def nco(self):
        n, pi, ga = self.n, self.pi, self.gamma
        return [
            [
                [-sum(pi[i][m] * ga[j][m][k] for m in range(n)) for k in range(n)]
                for j in range(n)
            ]
            for i in range(n)
        ]

    @cached_property
    def dj_endo(self):
        # (D_{dx^i} J)(dx^j)_k for the metric contravariant derivative
        n = self.n
        jm, dco, pi, djm = self.jmat, self.dco, self.pi, self.djmat
        return [
            [
                [
                    sum(jm[l][j] * dco[i][l][k] for l in range(n))
                    + sum(pi[i][m] * djm[m][k][j] for m in range(n))
                    - sum(jm[k][l] * dco[i][j][l] for l in range(n))
                    for k in range(n)
                ]
                for j in range(n)
            ]
            for i in range(n)
        ]

    @cached_property
    def nj_endo(self):
        # (nabla^pi_{dx^i} J)(dx^j)_k for the anchored Levi-Civita derivative
        n = self.n
        jm, pi, djm, ga = self.jmat, self.pi, self.djmat, self.gamma
        out = [[[0.0] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = 0.0
                    for m in range(n):
                        acc = acc + pi[i][m] * (
                            djm[m][k][j]
                            - sum(ga[l][m][k] * jm[l][j] for l in range(n))
                            + sum(jm[k][l] * ga[j][m][l] for l in range(n))
                        )
                    out[i][j][k] = acc
        return out

    # -- second-order tables -------------------------------------------------

    @cached_property
    def ddg(self):
        # ddg[m][l][i][j] = d_m d_l g_ij
        n = self.n
        ch, st = self.geom.chart, self.geom.strategy
        comps = self.geom.g.components
        out = [[[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                fn = comps[i][j].fn
                for m in range(n):
                    for l in range(m, n):
                        v = second_partial_callable(fn, self.coords, m, l, ch, st)
                        out[m][l][i][j] = v
                        out[m][l][j][i] = v
                        out[l][m][i][j] = v
                        out[l][m][j][i] = v
        return out

    @cached_property
    def dgamma(self):
        # dgamma[m][k][i][j] = d_m Gamma^k_ij
        n = self.n
        ginv, dginv, dg, ddg = self.ginv, self.dginv, self.dg, self.ddg
        out = [[[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for m in range(n):
            for i in range(n):
                for j in range(i, n):
                    combo = [dg[i][j][l] + dg[j][i][l] - dg[l][i][j] for l in range(n)]
                    dcombo = [
                        ddg[m][i][j][l] + ddg[m][j][i][l] - ddg[m][l][i][j] for l in range(n)
                    ]
                    for k in range(n):
                        v = 0.5 * sum(
                            dginv[m][k][l] * combo[l] + ginv[k][l] * dcombo[l] for l in range(n)
                        )
                        out[m][k][i][j] = v
                        out[m][k][j][i] = v
        return out

    @cached_property
    def riem(self):
        # standard convention: R(X,Y)Z = nab_X nab_Y Z - nab_Y nab_X Z - nab_[X,Y] Z
        n, ga, dga = self.n, self.gamma, self.dgamma
        out = [[[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for l in range(n):
            for i in range(n):
                for j in range(n):
                    for k in range(n):
                        out[l][i][j][k] = (
                            dga[i][l][j][k]
                            - dga[j][l][i][k]
                            + sum(ga[l][i][m] * ga[m][j][k] for m in range(n))
                            - sum(ga[l][j][m] * ga[m][i][k] for m in range(n))
                        )
        return out

    @cached_property
    def ricci_g(self):
        n, riem = self.n, self.riem
        return [[sum(riem[i][i][j][k] for i in range(n)) for k in range(n)] for j in range(n)]

    @cached_property
    def ddco(self):
        # ddco[m][i][j][k] = d_m dco[i][j][k]; the inner table is rebuilt as a
        # derived field of the point and differentiated by the strategy.
        geom = self.geom

        def dco_of(coords):
            return Frame(geom, coords).dco

        ch, st = geom.chart, geom.strategy
        return [partial_tree(dco_of, self.coords, m, ch, st) for m in range(self.n)]

    @cached_property
    def curv(self):
        # curv[i][j][l][k]: R(dx^i,dx^j)dx^l = D_[dx^i,dx^j] dx^l
        #                   - D_{dx^i}(D_{dx^j} dx^l) + D_{dx^j}(D_{dx^i} dx^l)
        n = self.n
        pi, dpi, dco, ddco = self.pi, self.dpi, self.dco, self.ddco
        out = [[[[0.0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    for k in range(n):
                        t_dir = sum(dpi[m][i][j] * dco[m][l][k] for m in range(n))
                        t_ij = sum(dco[j][l][m] * dco[i][m][k] for m in range(n)) + sum(
                            pi[i][m] * ddco[m][j][l][k] for m in range(n)
                        )
                        t_ji = sum(dco[i][l][m] * dco[j][m][k] for m in range(n)) + sum(
                            pi[j][m] * ddco[m][i][l][k] for m in range(n)
                        )
                        out[i][j][l][k] = t_dir - t_ij + t_ji
        return out

    @cached_property
    def ricci_pi(self):
        # r(a, b) = trace of gamma -> R(a, gamma) b over the coordinate coframe
        n, curv = self.n, self.curv
        return [[sum(curv[i][k][j][k] for k in range(n)) for j in range(n)] for i in range(n)]

    @cached_property
    def pi_r(self):
        # induced bivector: pi_r(a, b) = ricci(J a, b)
        n, jm, ric = self.n, self.jmat, self.ricci_pi
        return [[sum(jm[k][i] * ric[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    # -- small helpers -------------------------------------------------------

    def sharp_pi_vec(self, alpha):
        n, pi = self.n, self.pi
        return [sum(alpha[i] * pi[i][j] for i in range(n)) for j in range(n)]

    def sharp_g_vec(self, alpha):
        n, ginv = self.n, self.ginv
        return [sum(ginv[i][j] * alpha[j] for j in range(n)) for i in range(n)]

    def flat_g_vec(self, x):
        n, g = self.n, self.g
        return [sum(g[i][j] * x[j] for j in range(n)) for i in range(n)]

    def cometric_pair(self, alpha, beta):
        n, ginv = self.n, self.ginv
        return sum(ginv[i][j] * alpha[i] * beta[j] for i in range(n) for j in range(n))

    def cometric_norm(self, alpha):
        return abs(value(self.cometric_pair(alpha, alpha))) ** 0.5
