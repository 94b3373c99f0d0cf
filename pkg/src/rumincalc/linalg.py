"""Small exact linear algebra over Fraction: rref, rank, solve, nullspace.

Matrices are lists of lists of Fraction. Everything returns fresh lists; inputs
are never mutated. Sizes here are tiny (dimensions of exterior algebras up to
2^7), so plain Gaussian elimination with exact pivots is fine.
"""

from __future__ import annotations

from fractions import Fraction


def mat_copy(m):
    return [row[:] for row in m]


def rref(m):
    """Reduced row echelon form. Returns (rref_matrix, pivot_columns)."""
    a = mat_copy(m)
    rows = len(a)
    cols = len(a[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = Fraction(1, 1) / a[r][c]
        a[r] = [v * inv for v in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank(m):
    if not m:
        return 0
    return len(rref(m)[1])


def nullspace(m):
    """Basis of the right nullspace, one vector per free column."""
    if not m:
        return []
    cols = len(m[0])
    red, pivots = rref(m)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(m, b):
    """Solve m x = b exactly. Returns x or None if inconsistent.

    If the system is underdetermined the free variables are set to 0.
    """
    rows = len(m)
    cols = len(m[0]) if rows else 0
    aug = [m[i][:] + [b[i]] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def matmul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    out = [[Fraction(0)] * cols for _ in range(rows)]
    for i in range(rows):
        ai = a[i]
        for k in range(inner):
            f = ai[k]
            if f == 0:
                continue
            bk = b[k]
            row = out[i]
            for j in range(cols):
                if bk[j] != 0:
                    row[j] += f * bk[j]
    return out


def matvec(a, v):
    return [sum((row[j] * v[j] for j in range(len(v)) if v[j] != 0), Fraction(0)) for row in a]


def dot(u, v):
    return sum((x * y for x, y in zip(u, v) if x != 0 and y != 0), Fraction(0))


def gram_schmidt(vectors):
    """Pairwise-orthogonalize over Q without normalizing (norms stay rational).

    Returns (orthogonal_vectors, squared_norms); zero vectors are dropped.
    """
    ortho = []
    norms2 = []
    for v in vectors:
        w = v[:]
        for u, n2 in zip(ortho, norms2):
            c = dot(w, u) / n2
            if c != 0:
                w = [wi - c * ui for wi, ui in zip(w, u)]
        n2 = dot(w, w)
        if n2 != 0:
            ortho.append(w)
            norms2.append(n2)
    return ortho, norms2


def in_span(vectors, v):
    """Is v in span(vectors)? Exact rank test."""
    if not vectors:
        return all(x == 0 for x in v)
    return rank(vectors) == rank(vectors + [v])


def same_span(a, b):
    """Do two lists of vectors span the same subspace?"""
    ra = rank(a) if a else 0
    rb = rank(b) if b else 0
    if ra != rb:
        return False
    return rank(a + b) == ra if (a or b) else True


def poly_det(m):
    """Determinant by cofactor expansion for small matrices of ring elements.

    Entries only need +, *, - and a zero test via bool(); used for symbolic
    Jacobians of the group law (7x7 at most, mostly zeros).
    """
    size = len(m)
    if size == 0:
        raise ValueError("empty matrix")
    if size == 1:
        return m[0][0]
    total = None
    for j, entry in enumerate(m[0]):
        if not entry:
            continue
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        term = entry * poly_det(minor)
        if j % 2 == 1:
            term = -term
        total = term if total is None else total + term
    if total is None:
        return m[0][0] - m[0][0]  # a zero of the right type
    return total
