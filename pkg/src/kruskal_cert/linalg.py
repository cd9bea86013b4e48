"""Exact linear algebra over the rationals and GF(p).

Rank over the rationals uses fraction-free (Bareiss) elimination on rows
scaled to integers; over GF(p) plain Gaussian elimination mod p.  Vectors are
tuples of canonical field scalars (see :mod:`kruskal_cert.field`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Dict, List, Optional, Sequence, Tuple

from .field import Field

__all__ = [
    "Matrix",
    "VectorList",
    "Echelon",
    "rank",
    "rank_rows",
    "span_dim",
    "direct_sum_check",
    "determinant",
    "rref",
    "nullspace",
    "solve",
    "express",
    "coordinatize",
    "compound_matrix",
    "khatri_rao",
    "kron_vec",
]

Vector = Tuple


# ---------------------------------------------------------------- containers


@dataclass(frozen=True)
class Matrix:
    """Dense matrix stored row-major as a tuple of row tuples."""

    field: Field
    rows: int
    cols: int
    entries: Tuple[Vector, ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError("entries do not match the declared shape")

    @classmethod
    def from_rows(cls, field: Field, rows: Sequence[Sequence], cols: Optional[int] = None) -> "Matrix":
        entries = tuple(field.vector(r) for r in rows)
        if cols is None:
            if not entries:
                raise ValueError("cannot infer column count of an empty matrix")
            cols = len(entries[0])
        return cls(field, len(entries), cols, entries)

    @classmethod
    def from_columns(cls, field: Field, columns: Sequence[Sequence], rows: Optional[int] = None) -> "Matrix":
        cols = [field.vector(c) for c in columns]
        if rows is None:
            if not cols:
                raise ValueError("cannot infer row count of an empty matrix")
            rows = len(cols[0])
        entries = tuple(tuple(c[i] for c in cols) for i in range(rows))
        return cls(field, rows, len(cols), entries)

    def transpose(self) -> "Matrix":
        if self.rows == 0:
            return Matrix(self.field, self.cols, 0, tuple(() for _ in range(self.cols)))
        return Matrix(self.field, self.cols, self.rows, tuple(zip(*self.entries)))

    def column(self, c: int) -> Vector:
        return tuple(r[c] for r in self.entries)

    def columns(self) -> List[Vector]:
        return [self.column(c) for c in range(self.cols)]


@dataclass(frozen=True)
class VectorList:
    """Ordered multiset of vectors of a common length ``dim``."""

    field: Field
    dim: int
    vectors: Tuple[Vector, ...]

    def __post_init__(self) -> None:
        if any(len(v) != self.dim for v in self.vectors):
            raise ValueError(f"every vector must have length {self.dim}")

    @classmethod
    def of(cls, field: Field, vectors: Sequence[Sequence], dim: Optional[int] = None) -> "VectorList":
        vecs = tuple(field.vector(v) for v in vectors)
        if dim is None:
            if not vecs:
                raise ValueError("cannot infer the dimension of an empty list")
            dim = len(vecs[0])
        return cls(field, dim, vecs)

    def __len__(self) -> int:
        return len(self.vectors)

    def __getitem__(self, i: int) -> Vector:
        return self.vectors[i]

    def subset(self, indices) -> "VectorList":
        return VectorList(self.field, self.dim, tuple(self.vectors[i] for i in indices))

    def has_zero(self) -> bool:
        return any(not any(v) for v in self.vectors)


# ---------------------------------------------------------------- elimination


def _integer_row(row: Sequence[Fraction]) -> List[int]:
    den = 1
    for x in row:
        if x.denominator != 1:
            den = lcm(den, x.denominator)
    return [int(x * den) for x in row]


def _rank_bareiss(rows: List[List[int]], ncols: int) -> int:
    rows = [r for r in rows if any(r)]
    nrows = len(rows)
    rk = 0
    prev = 1
    for c in range(ncols):
        if rk == nrows:
            break
        piv = next((i for i in range(rk, nrows) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        top = rows[rk]
        pv = top[c]
        for i in range(rk + 1, nrows):
            row = rows[i]
            a = row[c]
            if a == 0:
                # entries still need the pv/prev rescaling to keep divisions exact
                rows[i] = row[:c] + [(pv * x) // prev for x in row[c:]]
            else:
                rows[i] = row[:c] + [(pv * x - a * y) // prev for x, y in zip(row[c:], top[c:])]
        prev = pv
        rk += 1
    return rk


def _rank_mod(rows: List[List[int]], ncols: int, p: int) -> int:
    rows = [list(r) for r in rows if any(r)]
    nrows = len(rows)
    rk = 0
    for c in range(ncols):
        if rk == nrows:
            break
        piv = next((i for i in range(rk, nrows) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rk], rows[piv] = rows[piv], rows[rk]
        top = rows[rk]
        inv = pow(top[c], -1, p)
        for i in range(rk + 1, nrows):
            a = rows[i][c]
            if a:
                f = a * inv % p
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], top)]
        rk += 1
    return rk


def rank_rows(rows: Sequence[Sequence], field: Field) -> int:
    """Rank of the matrix whose rows are ``rows``."""
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    if field.p is None:
        return _rank_bareiss([_integer_row([Fraction(x) for x in r]) for r in rows], ncols)
    return _rank_mod([list(r) for r in rows], ncols, field.p)


def determinant(rows: Sequence[Sequence], field: Field):
    """Determinant of a square matrix given by rows."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return field.one
    if field.p is None:
        scale = Fraction(1)
        ints = []
        for r in rows:
            fr = [Fraction(x) for x in r]
            ir = _integer_row(fr)
            nz = next((i for i, x in enumerate(fr) if x != 0), None)
            if nz is not None:
                scale *= fr[nz] / ir[nz]
            ints.append(ir)
        sign = 1
        prev = 1
        m = [list(r) for r in ints]
        for k in range(n - 1):
            if m[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
                if swap is None:
                    return Fraction(0)
                m[k], m[swap] = m[swap], m[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            prev = m[k][k]
        return sign * m[n - 1][n - 1] * scale
    p = field.p
    m = [list(r) for r in rows]
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = det * m[c][c] % p
        inv = pow(m[c][c], -1, p)
        for i in range(c + 1, n):
            a = m[i][c]
            if a:
                f = a * inv % p
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[c])]
    return det % p


def rref(rows: Sequence[Sequence], field: Field) -> Tuple[List[List], List[int]]:
    """Reduced row echelon form; returns the nonzero rows and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: List[int] = []
    rk = 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        inv = field.inv(m[rk][c])
        m[rk] = [field.mul(inv, x) for x in m[rk]]
        for i in range(len(m)):
            if i != rk and m[i][c] != 0:
                f = m[i][c]
                m[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(m[i], m[rk])]
        pivots.append(c)
        rk += 1
        if rk == len(m):
            break
    return m[:rk], pivots


def nullspace(rows: Sequence[Sequence], field: Field, ncols: Optional[int] = None) -> List[Vector]:
    """Basis of the right kernel {x : A x = 0}."""
    if ncols is None:
        if not rows:
            raise ValueError("column count needed for an empty matrix")
        ncols = len(rows[0])
    red, pivots = rref(rows, field)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [field.zero] * ncols
        x[f] = field.one
        for r, pc in zip(red, pivots):
            x[pc] = field.neg(r[f])
        basis.append(tuple(x))
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, field: Field, ncols: Optional[int] = None) -> Optional[Vector]:
    """One solution x of A x = b, or None when inconsistent."""
    if ncols is None:
        if not rows:
            raise ValueError("column count needed for an empty matrix")
        ncols = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, field)
    if pivots and pivots[-1] == ncols:
        return None
    x = [field.zero] * ncols
    for r, pc in zip(red, pivots):
        x[pc] = r[ncols]
    return tuple(x)


class Echelon:
    """Incremental echelon basis that remembers how each row was built.

    Vectors are added with a label; :meth:`reduce` returns the residual of a
    vector against the current span together with the coefficients (keyed by
    label) of the part that lies in the span.
    """

    def __init__(self, field: Field, dim: int):
        self.field = field
        self.dim = dim
        self._rows: List[Tuple[int, List, Dict]] = []
        self.labels: List = []

    @property
    def rank(self) -> int:
        return len(self._rows)

    def reduce(self, v: Sequence) -> Tuple[List, Dict]:
        f = self.field
        p = f.p
        w = list(v)
        combo: Dict = {}
        for piv, row, rc in self._rows:
            c = w[piv]
            if c == 0:
                continue
            if p is None:
                w = [x - c * y for x, y in zip(w, row)]
            else:
                w = [(x - c * y) % p for x, y in zip(w, row)]
            for lab, coef in rc.items():
                combo[lab] = f.add(combo.get(lab, f.zero), f.mul(c, coef))
        return w, {k: c for k, c in combo.items() if c != 0}

    def add(self, v: Sequence, label=None) -> bool:
        """Add ``v`` if it is outside the current span; report whether it was."""
        f = self.field
        w, combo = self.reduce(v)
        piv = next((i for i, x in enumerate(w) if x != 0), None)
        if piv is None:
            return False
        s = f.inv(w[piv])
        row = [f.mul(s, x) for x in w]
        if label is None:
            label = len(self.labels)
        rc = {k: f.neg(f.mul(s, c)) for k, c in combo.items()}
        rc[label] = s
        self._rows.append((piv, row, rc))
        self.labels.append(label)
        return True

    def contains(self, v: Sequence) -> bool:
        w, _ = self.reduce(v)
        return not any(w)


def express(target: Sequence, vectors: Sequence[Sequence], field: Field) -> Optional[Vector]:
    """Coefficients c with sum c_i v_i = target, or None if target is outside the span."""
    if not vectors:
        return () if not any(target) else None
    cols = len(vectors)
    rows = [[v[i] for v in vectors] for i in range(len(target))]
    return solve(rows, list(target), field, ncols=cols)


def coordinatize(vectors: Sequence[Sequence], field: Field) -> Tuple[List[int], List[Vector]]:
    """Greedy basis (scan order) and the coordinates of every vector in it.

    Coordinates live in F^r with r the rank, so any linear dependency among
    the inputs holds verbatim among their coordinate vectors.
    """
    if not vectors:
        return [], []
    ech = Echelon(field, len(vectors[0]))
    basis: List[int] = []
    reps: List[Dict] = []
    for i, v in enumerate(vectors):
        if ech.add(v, label=i):
            basis.append(i)
            reps.append({i: field.one})
        else:
            reps.append(ech.reduce(v)[1])
    pos = {b: k for k, b in enumerate(basis)}
    coords = []
    for rep in reps:
        c = [field.zero] * len(basis)
        for lab, coef in rep.items():
            c[pos[lab]] = coef
        coords.append(tuple(c))
    return basis, coords


# ---------------------------------------------------------------- public ops


def rank(M: Matrix) -> int:
    return rank_rows(M.entries, M.field)


def span_dim(V: VectorList) -> int:
    return rank_rows(V.vectors, V.field)


def direct_sum_check(A: VectorList, B: VectorList) -> bool:
    """True iff span(A) and span(B) intersect only in zero."""
    if A.dim != B.dim:
        raise ValueError(f"dimension mismatch: {A.dim} vs {B.dim}")
    if A.field != B.field:
        raise ValueError("vector lists live over different fields")
    if not A.vectors or not B.vectors:
        return True
    both = rank_rows(A.vectors + B.vectors, A.field)
    return both == span_dim(A) + span_dim(B)


def compound_matrix(M: Matrix, s: int) -> Matrix:
    """Matrix of s x s minors, row and column index sets in lexicographic order."""
    if not 1 <= s <= min(M.rows, M.cols):
        raise ValueError(f"s={s} outside 1..{min(M.rows, M.cols)}")
    rsets = list(combinations(range(M.rows), s))
    csets = list(combinations(range(M.cols), s))
    entries = tuple(
        tuple(determinant([[M.entries[i][j] for j in cs] for i in rs], M.field) for cs in csets)
        for rs in rsets
    )
    return Matrix(M.field, len(rsets), len(csets), entries)


def kron_vec(vectors: Sequence[Sequence], field: Optional[Field] = None) -> Vector:
    """Coordinates of v_1 (x) ... (x) v_k, last index fastest."""
    if not vectors:
        raise ValueError("kron_vec of an empty list")
    out = list(vectors[0])
    p = field.p if field is not None else None
    for v in vectors[1:]:
        if p is None:
            out = [a * b for a in out for b in v]
        else:
            out = [a * b % p for a in out for b in v]
    return tuple(out)


def khatri_rao(A: Matrix, B: Matrix) -> Matrix:
    """Column-wise Kronecker product."""
    if A.cols != B.cols:
        raise ValueError(f"column counts differ: {A.cols} vs {B.cols}")
    if A.field != B.field:
        raise ValueError("matrices live over different fields")
    cols = [kron_vec([A.column(c), B.column(c)], A.field) for c in range(A.cols)]
    if not cols:
        return Matrix(A.field, A.rows * B.rows, 0, tuple(() for _ in range(A.rows * B.rows)))
    return Matrix.from_columns(A.field, cols, rows=A.rows * B.rows)
