"""Small dense linear algebra over generic scalars.

Entries may be floats or nested :class:`~poismet.dual.Dual` values, which is
why this is hand-rolled: pivoting decisions use only the float value parts,
so elimination differentiates cleanly.  Dimensions here are tiny (n <= 6).
"""

from .dual import value


def mat_vec(m, v):
    return [sum(mi[j] * v[j] for j in range(len(v))) for mi in m]


def mat_mul(a, b):
    n, k, p = len(a), len(b), len(b[0])
    return [[sum(a[i][q] * b[q][j] for q in range(k)) for j in range(p)] for i in range(n)]


def transpose(m):
    return [list(col) for col in zip(*m)]


def det_value(m):
    """Determinant of the float value-part matrix (for nondegeneracy floors)."""
    n = len(m)
    a = [[value(x) for x in row] for row in m]
    sign = 1.0
    det = 1.0
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0.0:
            return 0.0
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        det *= a[col][col]
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return sign * det


def mat_inv(m):
    """Gauss-Jordan inverse; raises ZeroDivisionError on a (numerically) singular pivot."""
    n = len(m)
    aug = [list(row) + [1.0 if i == j else 0.0 for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value(aug[r][col])))
        if value(aug[piv][col]) == 0.0:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            f = aug[r][col]
            if isinstance(f, float) and f == 0.0:
                continue
            row = aug[r]
            prow = aug[col]
            aug[r] = [row[c] - f * prow[c] for c in range(2 * n)]
    return [row[n:] for row in aug]


def mat_solve(m, rhs):
    """Solve m x = rhs for a single right-hand-side vector."""
    n = len(m)
    aug = [list(row) + [rhs[i]] for i, row in enumerate(m)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value(aug[r][col])))
        if value(aug[piv][col]) == 0.0:
            raise ZeroDivisionError("singular matrix")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r == col:
                continue
            f = aug[r][col]
            if isinstance(f, float) and f == 0.0:
                continue
            row = aug[r]
            prow = aug[col]
            aug[r] = [row[c] - f * prow[c] for c in range(n + 1)]
    return [aug[i][n] for i in range(n)]
