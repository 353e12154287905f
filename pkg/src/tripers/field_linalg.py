"""Exact sparse linear algebra over a prime field GF(p).

Everything here is plain modular arithmetic on int coefficients; there is
no floating point anywhere.  Matrices are immutable and canonically
sorted, so equality is structural and all algorithms are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

Entry = Tuple[int, int, int]  # (row, col, value)
Vector = Dict[int, int]  # sparse column: row -> nonzero value


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def check_prime(p: int) -> int:
    if not is_prime(p):
        raise ValueError(f"characteristic must be prime, got {p}")
    return p


def inv_mod(v: int, p: int) -> int:
    return pow(v % p, p - 2, p)


@dataclass(frozen=True)
class SparseMatrix:
    """Immutable sparse matrix over GF(p), entries sorted by (col, row)."""

    rows: int
    cols: int
    p: int
    entries: Tuple[Entry, ...]

    @staticmethod
    def from_entries(rows: int, cols: int, p: int,
                     entries: Iterable[Tuple[int, int, int]]) -> "SparseMatrix":
        check_prime(p)
        acc: Dict[Tuple[int, int], int] = {}
        for r, c, v in entries:
            if not (0 <= r < rows and 0 <= c < cols):
                raise ValueError(f"entry ({r},{c}) out of range {rows}x{cols}")
            acc[(r, c)] = (acc.get((r, c), 0) + v) % p
        ents = tuple(sorted((r, c, v) for (r, c), v in acc.items() if v))
        ents = tuple(sorted(ents, key=lambda e: (e[1], e[0])))
        return SparseMatrix(rows, cols, p, ents)

    @staticmethod
    def zero(rows: int, cols: int, p: int) -> "SparseMatrix":
        check_prime(p)
        return SparseMatrix(rows, cols, p, ())

    @staticmethod
    def identity(n: int, p: int) -> "SparseMatrix":
        check_prime(p)
        return SparseMatrix(n, n, p, tuple((i, i, 1) for i in range(n)))

    def is_zero(self) -> bool:
        return not self.entries

    def columns(self) -> Dict[int, Vector]:
        cols: Dict[int, Vector] = {}
        for r, c, v in self.entries:
            cols.setdefault(c, {})[r] = v
        return cols

    def column(self, j: int) -> Vector:
        return {r: v for r, c, v in self.entries if c == j}

    def entry(self, i: int, j: int) -> int:
        for r, c, v in self.entries:
            if r == i and c == j:
                return v
        return 0

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix.from_entries(
            self.cols, self.rows, self.p,
            ((c, r, v) for r, c, v in self.entries))

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        self._check_shape(other)
        return SparseMatrix.from_entries(
            self.rows, self.cols, self.p,
            list(self.entries) + list(other.entries))

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + other.scale(-1)

    def scale(self, k: int) -> "SparseMatrix":
        k %= self.p
        return SparseMatrix.from_entries(
            self.rows, self.cols, self.p,
            ((r, c, v * k) for r, c, v in self.entries))

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows or self.p != other.p:
            raise ValueError("matrix product shape/field mismatch")
        by_k: Dict[int, List[Tuple[int, int]]] = {}
        for i, k, v in self.entries:
            by_k.setdefault(k, []).append((i, v))
        acc: Dict[Tuple[int, int], int] = {}
        for k, j, w in other.entries:
            for i, v in by_k.get(k, ()):
                key = (i, j)
                acc[key] = (acc.get(key, 0) + v * w) % self.p
        return SparseMatrix.from_entries(
            self.rows, other.cols, self.p,
            ((i, j, v) for (i, j), v in acc.items()))

    def apply(self, x: Vector) -> Vector:
        """Matrix-vector product on a sparse column."""
        out: Vector = {}
        cols = self.columns()
        for k, w in x.items():
            for r, v in cols.get(k, {}).items():
                out[r] = (out.get(r, 0) + v * w) % self.p
        return {r: v for r, v in out.items() if v}

    def rank(self) -> int:
        _, pivots = reduce_columns(self)
        return len(pivots)

    def _check_shape(self, other: "SparseMatrix") -> None:
        if (self.rows, self.cols, self.p) != (other.rows, other.cols, other.p):
            raise ValueError("matrix shape/field mismatch")


def reduce_columns(m: SparseMatrix) -> Tuple[SparseMatrix, Dict[int, int]]:
    """Persistence-style column reduction, left-to-right additions only.

    Each nonzero reduced column ends with a pivot (its largest nonzero
    row index) distinct from every other column's pivot.  Returns the
    reduced matrix and the map column -> pivot row.
    """
    p = m.p
    cols = [m.column(j) for j in range(m.cols)]
    pivot_owner: Dict[int, int] = {}  # pivot row -> column owning it
    pivots: Dict[int, int] = {}
    for j in range(m.cols):
        col = cols[j]
        while col:
            piv = max(col)
            owner = pivot_owner.get(piv)
            if owner is None:
                pivot_owner[piv] = j
                pivots[j] = piv
                break
            other = cols[owner]
            factor = (col[piv] * inv_mod(other[piv], p)) % p
            for r, v in other.items():
                nv = (col.get(r, 0) - factor * v) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
        cols[j] = col
    entries = []
    for j, col in enumerate(cols):
        for r, v in col.items():
            entries.append((r, j, v))
    return SparseMatrix.from_entries(m.rows, m.cols, p, entries), pivots


def _gauss_gf2(rows: List[Tuple[int, int]], nvars: int
               ) -> Optional[Tuple[List[int], List[List[int]]]]:
    """Solve a GF(2) system given as (coeff bitmask, rhs bit) rows.

    Returns (particular solution with free vars 0, nullspace basis)
    as lists of variable indices with value 1, or None if infeasible.
    """
    pivot_row_for: Dict[int, Tuple[int, int]] = {}  # var -> reduced row
    reduced: List[Tuple[int, int]] = []
    for mask, rhs in rows:
        for v, row in pivot_row_for.items():
            if mask >> v & 1:
                mask ^= row[0]
                rhs ^= row[1]
        if mask == 0:
            if rhs:
                return None
            continue
        v = mask.bit_length() - 1
        # back-eliminate v from earlier pivot rows
        for u, row in list(pivot_row_for.items()):
            if row[0] >> v & 1:
                pivot_row_for[u] = (row[0] ^ mask, row[1] ^ rhs)
        pivot_row_for[v] = (mask, rhs)
    particular = [v for v, row in pivot_row_for.items() if row[1]]
    pivot_vars = set(pivot_row_for)
    basis: List[List[int]] = []
    for f in range(nvars):
        if f in pivot_vars:
            continue
        vec = [f]
        for v, row in pivot_row_for.items():
            if row[0] >> f & 1:
                vec.append(v)
        basis.append(sorted(vec))
    return sorted(particular), basis


def _gauss_gfp(rows: List[Tuple[Dict[int, int], int]], nvars: int, p: int
               ) -> Optional[Tuple[Dict[int, int], List[Dict[int, int]]]]:
    """Odd-p analogue of _gauss_gf2 with sparse dict rows."""
    pivot_row_for: Dict[int, Tuple[Dict[int, int], int]] = {}
    for coeffs, rhs in rows:
        coeffs = dict(coeffs)
        for v, (prow, prhs) in pivot_row_for.items():
            c = coeffs.get(v, 0) % p
            if c:
                for u, w in prow.items():
                    nv = (coeffs.get(u, 0) - c * w) % p
                    if nv:
                        coeffs[u] = nv
                    else:
                        coeffs.pop(u, None)
                rhs = (rhs - c * prhs) % p
        coeffs = {u: w % p for u, w in coeffs.items() if w % p}
        if not coeffs:
            if rhs % p:
                return None
            continue
        v = max(coeffs)
        inv = inv_mod(coeffs[v], p)
        coeffs = {u: (w * inv) % p for u, w in coeffs.items()}
        rhs = (rhs * inv) % p
        for u, (prow, prhs) in list(pivot_row_for.items()):
            c = prow.get(v, 0)
            if c:
                nrow = dict(prow)
                for uu, w in coeffs.items():
                    nv = (nrow.get(uu, 0) - c * w) % p
                    if nv:
                        nrow[uu] = nv
                    else:
                        nrow.pop(uu, None)
                pivot_row_for[u] = (nrow, (prhs - c * rhs) % p)
        pivot_row_for[v] = (coeffs, rhs)
    particular = {v: row[1] for v, row in pivot_row_for.items() if row[1]}
    pivot_vars = set(pivot_row_for)
    basis: List[Dict[int, int]] = []
    for f in range(nvars):
        if f in pivot_vars:
            continue
        vec = {f: 1}
        for v, (prow, _) in pivot_row_for.items():
            c = prow.get(f, 0)
            if c:
                vec[v] = (-c) % p
        basis.append(vec)
    return particular, basis


def solve_affine(a: SparseMatrix, b: Vector, mask: Sequence[int]
                 ) -> Optional[Tuple[Vector, List[Vector]]]:
    """Solve A x = b with support(x) restricted to `mask`.

    Returns (particular solution, nullspace basis restricted to the mask),
    or None if infeasible.  Deterministic: the particular solution is the
    one produced by a fixed elimination order with free variables at 0.
    """
    for r in b:
        if not 0 <= r < a.rows:
            raise ValueError("rhs index out of range")
    var_index = {j: k for k, j in enumerate(sorted(set(mask)))}
    for j in var_index:
        if not 0 <= j < a.cols:
            raise ValueError("mask index out of range")
    nvars = len(var_index)
    p = a.p
    by_row: Dict[int, Dict[int, int]] = {}
    for r, c, v in a.entries:
        if c in var_index:
            by_row.setdefault(r, {})[var_index[c]] = v
    eq_rows = sorted(set(by_row) | {r for r, v in b.items() if v % p})
    inv_index = sorted(set(mask))
    if p == 2:
        rows2 = []
        for r in eq_rows:
            bits = 0
            for k, v in by_row.get(r, {}).items():
                if v % 2:
                    bits |= 1 << k
            rows2.append((bits, b.get(r, 0) % 2))
        res = _gauss_gf2(rows2, nvars)
        if res is None:
            return None
        part2, basis2 = res
        particular = {inv_index[k]: 1 for k in part2}
        basis = [{inv_index[k]: 1 for k in vec} for vec in basis2]
        return particular, basis
    rowsp = [(by_row.get(r, {}), b.get(r, 0) % p) for r in eq_rows]
    resp = _gauss_gfp(rowsp, nvars, p)
    if resp is None:
        return None
    partp, basisp = resp
    particular = {inv_index[k]: v for k, v in partp.items()}
    basis = [{inv_index[k]: v for k, v in vec.items()} for vec in basisp]
    return particular, basis


def solve_masked(a: SparseMatrix, b: Vector, mask: Sequence[int]
                 ) -> Optional[Vector]:
    """First solution of A x = b with support in `mask`, or None."""
    res = solve_affine(a, b, mask)
    if res is None:
        return None
    return res[0]


def nullspace_masked(a: SparseMatrix, mask: Sequence[int]) -> List[Vector]:
    """Basis of {x : A x = 0, support(x) in mask}."""
    res = solve_affine(a, {}, mask)
    assert res is not None
    return res[1]
