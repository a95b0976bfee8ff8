"""Exact linear algebra over the rationals and over finite cyclic groups.

Matrices are plain lists of rows of :class:`fractions.Fraction`.  Everything
here is deterministic: pivots are taken left to right and free variables of
a solve are set to zero.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def frac(x) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def zeros(rows: int, cols: int) -> Matrix:
    return [[Fraction(0)] * cols for _ in range(rows)]


def identity(n: int) -> Matrix:
    m = zeros(n, n)
    for i in range(n):
        m[i][i] = Fraction(1)
    return m


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    out = zeros(len(a), cols)
    for i, row in enumerate(a):
        orow = out[i]
        for k in range(inner):
            x = row[k]
            if x:
                brow = b[k]
                for j in range(cols):
                    if brow[j]:
                        orow[j] += x * brow[j]
    return out


def matvec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v) if x and y), Fraction(0)) for row in a]


def transpose(a: Matrix, cols: int | None = None) -> Matrix:
    if not a:
        return [[] for _ in range(cols or 0)]
    return [list(col) for col in zip(*a)]


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(row) for row in a]
    if not m:
        return m, []
    rows, cols = len(m), len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                mi, mr = m[i], m[r]
                m[i] = [x - f * y for x, y in zip(mi, mr)]
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1])


def nullspace(a: Matrix, cols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : a x = 0}; ``cols`` is needed when ``a`` has no rows."""
    if not a:
        n = cols or 0
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    n = len(a[0])
    red, piv = rref(a)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, p in enumerate(piv):
            v[p] = -red[r][f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Sequence[Fraction], cols: int | None = None) -> list[Fraction] | None:
    """One solution of ``a x = b`` (free variables zero), or None."""
    n = len(a[0]) if a else (cols or 0)
    if not a:
        return [Fraction(0)] * n if all(x == 0 for x in b) else None
    aug = [list(row) + [frac(x)] for row, x in zip(a, b)]
    red, piv = rref(aug)
    if n in piv:
        return None
    x = [Fraction(0)] * n
    for r, p in enumerate(piv):
        x[p] = red[r][n]
    return x


def in_span(vectors: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> bool:
    if not vectors:
        return all(x == 0 for x in v)
    a = transpose([list(x) for x in vectors])
    return solve(a, v) is not None


# --- integer Smith normal form ---------------------------------------------

def smith_diagonal(a: list[list[int]]) -> list[int]:
    """Diagonal entries of the Smith normal form of an integer matrix.

    Only the invariant factors are needed for counting images over Z/n, so
    the transforming matrices are not tracked.
    """
    m = [list(map(int, row)) for row in a]
    if not m or not m[0]:
        return []
    rows, cols = len(m), len(m[0])
    diag: list[int] = []
    t = 0
    while t < min(rows, cols):
        # smallest nonzero pivot in the remaining block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if m[i][j] and (best is None or abs(m[i][j]) < abs(m[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        m[t], m[i] = m[i], m[t]
        for row in m:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            p = m[t][t]
            for i in range(t + 1, rows):
                if m[i][t]:
                    q = m[i][t] // p
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                    if m[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if m[t][j]:
                    q = m[t][j] // p
                    for row in m:
                        row[j] -= q * row[t]
                    if m[t][j]:
                        done = False
            if done:
                # divisibility of the remaining block by the pivot
                bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                            if m[i][j] % p), None)
                if bad is None:
                    break
                m[t] = [x + y for x, y in zip(m[t], m[bad[0]])]
                continue
            # move the new smallest entry of row/column t into the pivot
            cand = [(abs(m[i][t]), i, t) for i in range(t, rows) if m[i][t]]
            cand += [(abs(m[t][j]), t, j) for j in range(t, cols) if m[t][j]]
            _, i, j = min(cand)
            m[t], m[i] = m[i], m[t]
            for row in m:
                row[t], row[j] = row[j], row[t]
        diag.append(abs(m[t][t]))
        t += 1
    return diag


def image_size_mod(a: list[list[int]], n: int, cols: int) -> int:
    """|a((Z/n)^cols)| for an integer matrix ``a`` acting on (Z/n)^cols."""
    if not a or cols == 0:
        return 1
    size = 1
    for d in smith_diagonal(a):
        size *= n // gcd(n, d)
    return size


def kernel_size_mod(a: list[list[int]], n: int, cols: int) -> int:
    return n ** cols // image_size_mod(a, n, cols)


def solve_integer(a: list[list[int]], b: Sequence[int], cols: int) -> list[int] | None:
    """An integer solution of ``a x = b``, or None.

    Column-style Hermite reduction: unimodular column operations U bring
    ``a`` to echelon form H = a U, then H y = b is solved by substitution
    and x = U y.
    """
    m = [list(map(int, row)) for row in a]
    rows = len(m)
    u = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def colop(i: int, j: int, p: int, q: int, r: int, s: int) -> None:
        # (col_i, col_j) <- (p col_i + q col_j, r col_i + s col_j)
        for mat in (m, u):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = p * x + q * y, r * x + s * y

    piv: list[tuple[int, int]] = []   # (row, col)
    c = 0
    for r in range(rows):
        if c == cols:
            break
        for j in range(c + 1, cols):
            if m[r][j]:
                x, y = m[r][c], m[r][j]
                g, p, q = _xgcd(x, y)
                colop(c, j, p, q, -y // g, x // g)
        if m[r][c]:
            piv.append((r, c))
            c += 1
    y = [0] * cols
    k = 0
    for r in range(rows):
        acc = int(b[r]) - sum(m[r][j] * y[j] for j in range(cols) if m[r][j] and y[j])
        if k < len(piv) and piv[k][0] == r:
            col = piv[k][1]
            if acc % m[r][col]:
                return None
            y[col] = acc // m[r][col]
            k += 1
        elif acc:
            return None
    return [sum(u[i][j] * y[j] for j in range(cols)) for i in range(cols)]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """g, p, q with p a + q b = g = gcd(a, b) > 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    aa, bb = a, b
    while bb:
        q = aa // bb
        aa, bb = bb, aa - q * bb
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if aa < 0:
        aa, x0, y0 = -aa, -x0, -y0
    return aa, x0, y0


# --- systems over products of cyclic groups ---------------------------------

def _with_slack(a: list[list[int]], row_mod: Sequence[int], cols: int) -> list[list[int]]:
    r = len(a)
    return [list(a[i][:cols]) + [row_mod[i] if j == i else 0 for j in range(r)] for i in range(r)]


def solve_mod(a: list[list[int]], b: Sequence[int], col_mod: Sequence[int],
              row_mod: Sequence[int]) -> list[int] | None:
    """x in prod Z/col_mod with a x = b (row i read mod row_mod[i]), or None.

    The matrix must be well defined on the product, i.e. a[i][j]*col_mod[j]
    divisible by row_mod[i].
    """
    cols = len(col_mod)
    if not a:
        return [0] * cols
    x = solve_integer(_with_slack(a, row_mod, cols), list(b), cols + len(a))
    if x is None:
        return None
    return [v % n for v, n in zip(x[:cols], col_mod)]


def kernel_order_mod(a: list[list[int]], col_mod: Sequence[int], row_mod: Sequence[int]) -> int:
    """|ker| of the map prod Z/col_mod -> prod Z/row_mod given by a."""
    dom = 1
    for n in col_mod:
        dom *= n
    if not a:
        return dom
    target = 1
    for n in row_mod:
        target *= n
    coker = 1
    for d in smith_diagonal(_with_slack(a, row_mod, len(col_mod))):
        coker *= d
    return dom * coker // target
