"""Exact verification of the bracket-level compatibility criteria on Lie
algebras with (optionally) an ad-invariant bilinear form.

Everything here is exact rational arithmetic; a check passes only when its
residual is exactly zero.  The two criteria characterize the two
compatibility notions for the bivector built from a left-invariant Killing
vector on a Lie group with a bi-invariant pseudo-metric:

* ``nabla_compat_residual``: [[u, [x, u]], y] = 0 for all basis x, y
* ``d_compat_residual``:     [[u, x], [u, y]] = 0 for all basis x, y
"""

import itertools
import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import NotInvariant, SceneError
from .report import ResidualReport

GRID_CAP = 10**6


def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if x != int(x):
            raise SceneError(f"non-integral float {x!r} is not an exact rational")
        return Fraction(int(x))
    raise SceneError(f"cannot read {x!r} as an exact rational")


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants c[i][j][k] (coefficient of e_k in [e_i, e_j]),
    exact rationals, antisymmetric in (i, j)."""

    dimension: int
    c: tuple
    name: str = ""

    @classmethod
    def from_brackets(cls, dimension, brackets, name=""):
        """brackets: {(i, j): {k: rational}} with 0-based i < j."""
        d = dimension
        c = [[[Fraction(0)] * d for _ in range(d)] for _ in range(d)]
        for (i, j), comp in brackets.items():
            if not 0 <= i < d or not 0 <= j < d or i == j:
                raise SceneError(f"bad bracket index pair {(i, j)}")
            for k, v in comp.items():
                v = _frac(v)
                if c[i][j][k] != 0 and c[i][j][k] != v:
                    raise SceneError(f"conflicting duplicate entry for bracket {(i, j)}")
                c[i][j][k] = v
                c[j][i][k] = -v
        frozen = tuple(tuple(tuple(row) for row in plane) for plane in c)
        return cls(d, frozen, name)

    def bracket(self, x, y):
        d = self.dimension
        out = [Fraction(0)] * d
        for i in range(d):
            xi = x[i]
            if xi == 0:
                continue
            for j in range(d):
                yj = y[j]
                if yj == 0:
                    continue
                cij = self.c[i][j]
                for k in range(d):
                    if cij[k] != 0:
                        out[k] += xi * yj * cij[k]
        return out

    def basis(self, i):
        return [Fraction(1) if k == i else Fraction(0) for k in range(self.dimension)]


def bracket(algebra, x, y):
    """[x, y] by structure-constant contraction; exact."""
    return algebra.bracket([_frac(v) for v in x], [_frac(v) for v in y])


def jacobi_residual(algebra):
    """Max |component| of the cyclic Jacobi sum over all basis triples."""
    d = algebra.dimension
    worst = Fraction(0)
    for i, j, k in itertools.combinations(range(d), 3):
        ei, ej, ek = algebra.basis(i), algebra.basis(j), algebra.basis(k)
        s = algebra.bracket(ei, algebra.bracket(ej, ek))
        for a, b in zip(s, algebra.bracket(ej, algebra.bracket(ek, ei))):
            pass
        t = algebra.bracket(ej, algebra.bracket(ek, ei))
        u = algebra.bracket(ek, algebra.bracket(ei, ej))
        for comp in (abs(s[m] + t[m] + u[m]) for m in range(d)):
            if comp > worst:
                worst = comp
    return worst


@dataclass(frozen=True)
class InvariantForm:
    """Symmetric exact-rational matrix, intended ad-invariant and nondegenerate."""

    entries: tuple

    @classmethod
    def from_rows(cls, rows):
        mat = tuple(tuple(_frac(v) for v in row) for row in rows)
        d = len(mat)
        for row in mat:
            if len(row) != d:
                raise SceneError("form must be square")
        for i in range(d):
            for j in range(d):
                if mat[i][j] != mat[j][i]:
                    raise SceneError("form must be symmetric")
        return cls(mat)

    def pair(self, x, y):
        d = len(self.entries)
        return sum(self.entries[i][j] * x[i] * y[j] for i in range(d) for j in range(d))

    def determinant(self):
        d = len(self.entries)
        a = [list(row) for row in self.entries]
        det = Fraction(1)
        for col in range(d):
            piv = None
            for r in range(col, d):
                if a[r][col] != 0:
                    piv = r
                    break
            if piv is None:
                return Fraction(0)
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det *= a[col][col]
            for r in range(col + 1, d):
                f = a[r][col] / a[col][col]
                for c2 in range(col, d):
                    a[r][c2] -= f * a[col][c2]
        return det


def ad_invariance_residual(algebra, form):
    """Max |B([x,y],z) + B(y,[x,z])| over basis triples; exact."""
    d = algebra.dimension
    worst = Fraction(0)
    for x in range(d):
        ex = algebra.basis(x)
        for y in range(d):
            ey = algebra.basis(y)
            bxy = algebra.bracket(ex, ey)
            for z in range(d):
                ez = algebra.basis(z)
                v = abs(form.pair(bxy, ez) + form.pair(ey, algebra.bracket(ex, ez)))
                if v > worst:
                    worst = v
    return worst


def nabla_compat_residual(algebra, u):
    """Max |component| of [[u, [x, u]], y] over basis pairs (x, y)."""
    d = algebra.dimension
    u = [_frac(v) for v in u]
    worst = Fraction(0)
    for x in range(d):
        inner = algebra.bracket(u, algebra.bracket(algebra.basis(x), u))
        if all(v == 0 for v in inner):
            continue
        for y in range(d):
            for comp in algebra.bracket(inner, algebra.basis(y)):
                if abs(comp) > worst:
                    worst = abs(comp)
    return worst


def d_compat_residual(algebra, u):
    """Max |component| of [[u, x], [u, y]] over basis pairs (x, y)."""
    d = algebra.dimension
    u = [_frac(v) for v in u]
    adu = [algebra.bracket(u, algebra.basis(x)) for x in range(d)]
    worst = Fraction(0)
    for x in range(d):
        for y in range(x + 1, d):
            for comp in algebra.bracket(adu[x], adu[y]):
                if abs(comp) > worst:
                    worst = abs(comp)
    return worst


def classify_vector(algebra, u):
    """'both', 'nabla', 'd' or 'neither' according to which criteria hold."""
    n_ok = nabla_compat_residual(algebra, u) == 0
    d_ok = d_compat_residual(algebra, u) == 0
    if n_ok and d_ok:
        return "both"
    if n_ok:
        return "nabla"
    if d_ok:
        return "d"
    return "neither"


def grid_vectors(dimension, lo=-2, hi=2, cap=GRID_CAP, seed=0):
    """Canonical enumeration of the integer grid, falling back to seeded
    random rational sampling past the cap."""
    size = (hi - lo + 1) ** dimension
    values = range(lo, hi + 1)
    if size <= cap:
        for tup in itertools.product(values, repeat=dimension):
            yield [Fraction(v) for v in tup]
        return
    rng = random.Random(seed)
    for _ in range(cap):
        yield [Fraction(rng.randint(lo * 2, hi * 2), rng.randint(1, 4)) for _ in range(dimension)]


def search_vectors(algebra, condition=None, lo=-2, hi=2, limit=GRID_CAP, seed=0):
    """Enumerate grid vectors in canonical order and classify each.

    With ``condition`` in {"nabla", "d"} returns (u, residual) pairs for
    that criterion; otherwise returns (u, classification) pairs.
    """
    if jacobi_residual(algebra) != 0:
        raise SceneError(f"algebra {algebra.name!r} fails the Jacobi identity")
    out = []
    for count, u in enumerate(grid_vectors(algebra.dimension, lo, hi, cap=limit, seed=seed)):
        if count >= limit:
            break
        if condition == "nabla":
            out.append((u, nabla_compat_residual(algebra, u)))
        elif condition == "d":
            out.append((u, d_compat_residual(algebra, u)))
        else:
            out.append((u, classify_vector(algebra, u)))
    return out


def independence_witnesses(algebras, lo=-1, hi=1, limit=GRID_CAP):
    """Vectors satisfying exactly one criterion, across a list of algebras."""
    found = []
    for alg in algebras:
        for u, cls in search_vectors(alg, lo=lo, hi=hi, limit=limit):
            if cls in ("nabla", "d"):
                found.append((alg.name, u, cls))
    return found


def biinvariant_geometry(algebra, form, u):
    """Bi-invariant report for the vector u: the derivative endomorphism is
    x -> [x, u]/2; checks its exact skewness and maps the two bracket
    criteria to the two compatibility verdicts."""
    if ad_invariance_residual(algebra, form) != 0:
        raise NotInvariant(f"form on {algebra.name!r} is not ad-invariant")
    d = algebra.dimension
    u = [_frac(v) for v in u]
    rep = ResidualReport(f"biinvariant:{algebra.name}", strategy="exact")
    jt = [algebra.bracket(algebra.basis(x), u) for x in range(d)]
    for col in jt:
        for k in range(d):
            col[k] = col[k] / 2
    worst = Fraction(0)
    for x in range(d):
        for y in range(d):
            v = abs(form.pair(jt[x], algebra.basis(y)) + form.pair(algebra.basis(x), jt[y]))
            if v > worst:
                worst = v
    rn = nabla_compat_residual(algebra, u)
    rd = d_compat_residual(algebra, u)
    rep.add("skewness", float(worst), 1e-300, note="exact" if worst == 0 else f"exact {worst}")
    c = rep.checks[-1]
    c.passed = worst == 0
    c1 = rep.add("nabla_compat_condition", float(rn), 1e-300, note=f"exact {rn}")
    c1.passed = rn == 0
    c2 = rep.add("d_compat_condition", float(rd), 1e-300, note=f"exact {rd}")
    c2.passed = rd == 0
    rep.notes.append(f"nabla-compatible: {rn == 0}; d-compatible: {rd == 0}")
    return rep


# -- file format ---------------------------------------------------------------


def algebra_from_dict(data):
    """JSON schema: {"dimension": d, "name": str,
    "brackets": {"i,j": {"k": "p/q", ...}, ...}, "form": [[rationals]]}
    with 1-based indices; omitted brackets are zero; the antisymmetric
    completion is applied and conflicting duplicates are rejected."""
    try:
        d = int(data["dimension"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError("algebra file needs an integer 'dimension'") from exc
    name = data.get("name", "")
    brackets = {}
    for key, comp in data.get("brackets", {}).items():
        try:
            i_s, j_s = key.split(",")
            i, j = int(i_s) - 1, int(j_s) - 1
        except ValueError as exc:
            raise SceneError(f"bad bracket key {key!r}; expected 'i,j'") from exc
        if i == j:
            raise SceneError(f"bracket {key!r} pairs a vector with itself")
        comp_parsed = {}
        for k_s, v in comp.items():
            k = int(k_s) - 1
            if not 0 <= k < d:
                raise SceneError(f"component index {k_s} out of range in bracket {key!r}")
            comp_parsed[k] = _frac(v)
        sign = 1
        if i > j:
            i, j = j, i
            sign = -1
        if (i, j) in brackets:
            prior = brackets[(i, j)]
            candidate = {k: sign * v for k, v in comp_parsed.items()}
            if prior != candidate:
                raise SceneError(f"conflicting duplicate bracket entries around {key!r}")
            continue
        brackets[(i, j)] = {k: sign * v for k, v in comp_parsed.items()}
    alg = LieAlgebra.from_brackets(d, brackets, name)
    form = None
    if data.get("form") is not None:
        form = InvariantForm.from_rows(data["form"])
        if len(form.entries) != d:
            raise SceneError("form dimension does not match the algebra")
    return alg, form


def load_algebra(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SceneError(f"algebra file {path}: {exc}") from exc
    return algebra_from_dict(data)


def algebra_check_report(algebra, form=None):
    rep = ResidualReport(f"lie-check:{algebra.name}", strategy="exact")
    rj = jacobi_residual(algebra)
    c = rep.add("jacobi", float(rj), 1e-300, note=f"exact {rj}")
    c.passed = rj == 0
    if form is not None:
        ra = ad_invariance_residual(algebra, form)
        c = rep.add("ad_invariance", float(ra), 1e-300, note=f"exact {ra}")
        c.passed = ra == 0
        det = form.determinant()
        rep.add_flag("form_nondegenerate", det != 0, note=f"det = {det}")
    return rep


# -- shipped catalog -----------------------------------------------------------


def catalog():
    """Curated fixtures; every entry passes the exact Jacobi check and each
    shipped form is exactly ad-invariant and nondegenerate."""
    algs = {}

    def put(alg, form=None):
        algs[alg.name] = (alg, form)

    put(LieAlgebra.from_brackets(3, {}, name="abelian3"))

    # nonabelian 2-dim algebra: [e1, e2] = e2 (affine line)
    put(LieAlgebra.from_brackets(2, {(0, 1): {1: 1}}, name="affine_line"))

    put(LieAlgebra.from_brackets(3, {(0, 1): {2: 1}}, name="heisenberg3"))

    # sl2 in the basis (e, f, h): [h,e] = 2e, [h,f] = -2f, [e,f] = h
    sl2 = LieAlgebra.from_brackets(
        3, {(0, 1): {2: 1}, (2, 0): {0: 2}, (2, 1): {1: -2}}, name="sl2"
    )
    put(sl2, InvariantForm.from_rows([[0, 4, 0], [4, 0, 0], [0, 0, 8]]))

    so3 = LieAlgebra.from_brackets(
        3, {(0, 1): {2: 1}, (1, 2): {0: 1}, (2, 0): {1: 1}}, name="so3"
    )
    put(so3, InvariantForm.from_rows([[-2, 0, 0], [0, -2, 0], [0, 0, -2]]))

    # 4-dim oscillator algebra (E, P, Q, H): [P,Q] = E, [H,P] = Q, [H,Q] = -P
    osc4 = LieAlgebra.from_brackets(
        4, {(1, 2): {0: 1}, (3, 1): {2: 1}, (3, 2): {1: -1}}, name="oscillator4"
    )
    put(
        osc4,
        InvariantForm.from_rows(
            [[0, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0], [1, 0, 0, 0]]
        ),
    )

    # 6-dim oscillator with frequency pair (1, 2): a double extension of the
    # abelian R^4 by the two-block rotation derivation
    osc6 = LieAlgebra.from_brackets(
        6,
        {
            (5, 1): {2: 1},
            (5, 2): {1: -1},
            (5, 3): {4: 2},
            (5, 4): {3: -2},
            (1, 2): {0: 1},
            (3, 4): {0: 2},
        },
        name="oscillator6",
    )
    put(
        osc6,
        InvariantForm.from_rows(
            [
                [0, 0, 0, 0, 0, 1],
                [0, 1, 0, 0, 0, 0],
                [0, 0, 1, 0, 0, 0],
                [0, 0, 0, 1, 0, 0],
                [0, 0, 0, 0, 1, 0],
                [1, 0, 0, 0, 0, 0],
            ]
        ),
    )

    # 5-dim 3-step nilpotent quadratic algebra:
    # [e1,e5] = e4 - e3, [e2,e5] = -e1 + e3 + e4, [e1,e2] = e3
    nil5 = LieAlgebra.from_brackets(
        5,
        {(0, 4): {3: 1, 2: -1}, (1, 4): {0: -1, 2: 1, 3: 1}, (0, 1): {2: 1}},
        name="nilpotent5",
    )
    put(
        nil5,
        InvariantForm.from_rows(
            [
                [-1, -1, 0, 0, 2],
                [-1, 1, 0, -1, 0],
                [0, 0, 0, 0, 1],
                [0, -1, 0, 0, 1],
                [2, 0, 1, 1, 0],
            ]
        ),
    )

    # 4-dim solvable algebra where the swap generator separates the two
    # criteria: u = e1 satisfies the d-condition but not the nabla one
    put(
        LieAlgebra.from_brackets(
            4,
            {(0, 1): {2: 1}, (0, 2): {1: 1}, (3, 1): {1: -1}, (3, 2): {2: -1}},
            name="swap_scaling4",
        )
    )

    return algs
