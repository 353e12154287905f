"""Filtered chain maps and the hom-side calculus.

The central primitive is `solve_map_system`, a deterministic exact solver
for affine systems whose unknowns are graded maps with a filtration-shift
bound.  Homotopy search, inverse construction and triangle verification
all reduce to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .complexes import FilteredComplex, Generator
from .field_linalg import SparseMatrix, Vector, solve_affine

NEG_INF = float("-inf")
INF = float("inf")


class BudgetExceeded(RuntimeError):
    """Raised when an enumeration would exceed its configured budget."""


@dataclass(frozen=True)
class FilteredChainMap:
    """Degree-homogeneous linear map between filtered complexes.

    matrix[i, j] is the coefficient of target generator i in f(source
    generator j); every entry must connect degrees deg_t = deg_s + degree.
    """

    source: FilteredComplex
    target: FilteredComplex
    degree: int
    matrix: SparseMatrix

    def __post_init__(self):
        if self.matrix.rows != len(self.target) or \
           self.matrix.cols != len(self.source):
            raise ValueError("map matrix shape does not match endpoints")
        if self.source.p != self.target.p:
            raise ValueError("map between complexes over different fields")
        for r, c, _ in self.matrix.entries:
            if self.target.degree(r) != self.source.degree(c) + self.degree:
                raise ValueError(
                    f"entry {self.source.gid(c)}->{self.target.gid(r)} "
                    f"violates degree {self.degree}")

    @property
    def p(self) -> int:
        return self.source.p

    def shift(self) -> float:
        """ell(f): max filtration increase over entries; -inf for zero."""
        if self.matrix.is_zero():
            return NEG_INF
        return max(self.target.filt(r) - self.source.filt(c)
                   for r, c, _ in self.matrix.entries)

    def is_zero(self) -> bool:
        return self.matrix.is_zero()

    def __add__(self, other: "FilteredChainMap") -> "FilteredChainMap":
        self._check_parallel(other)
        return FilteredChainMap(self.source, self.target, self.degree,
                                self.matrix + other.matrix)

    def __sub__(self, other: "FilteredChainMap") -> "FilteredChainMap":
        self._check_parallel(other)
        return FilteredChainMap(self.source, self.target, self.degree,
                                self.matrix - other.matrix)

    def scale(self, k: int) -> "FilteredChainMap":
        return FilteredChainMap(self.source, self.target, self.degree,
                                self.matrix.scale(k))

    def __neg__(self) -> "FilteredChainMap":
        return self.scale(-1)

    def _check_parallel(self, other: "FilteredChainMap") -> None:
        if self.source != other.source or self.target != other.target \
                or self.degree != other.degree:
            raise ValueError("maps are not parallel")

    def to_json_dict(self) -> dict:
        return {
            "source": self.source.to_json_dict(),
            "target": self.target.to_json_dict(),
            "degree": self.degree,
            "entries": [
                {"from": self.source.gid(c), "to": self.target.gid(r),
                 "coeff": v}
                for r, c, v in self.matrix.entries],
        }

    @staticmethod
    def from_json_dict(data: dict) -> "FilteredChainMap":
        src = FilteredComplex.from_json_dict(data["source"])
        tgt = FilteredComplex.from_json_dict(data["target"])
        return map_from_entries(
            src, tgt, int(data.get("degree", 0)),
            [(e["from"], e["to"], int(e["coeff"]))
             for e in data.get("entries", [])])


def map_from_entries(source: FilteredComplex, target: FilteredComplex,
                     degree: int,
                     entries: Iterable[Tuple[str, str, int]]
                     ) -> FilteredChainMap:
    mat = SparseMatrix.from_entries(
        len(target), len(source), source.p,
        ((target.index(tgt), source.index(src), coeff)
         for src, tgt, coeff in entries))
    return FilteredChainMap(source, target, degree, mat)


def zero_map(source: FilteredComplex, target: FilteredComplex,
             degree: int = 0) -> FilteredChainMap:
    return FilteredChainMap(
        source, target, degree,
        SparseMatrix.zero(len(target), len(source), source.p))


def identity_map(c: FilteredComplex) -> FilteredChainMap:
    return FilteredChainMap(c, c, 0, SparseMatrix.identity(len(c), c.p))


def eta(c: FilteredComplex, r: float) -> FilteredChainMap:
    """The comparison map Sigma^r C -> C given by the identity matrix."""
    return FilteredChainMap(c.shift(r), c, 0,
                            SparseMatrix.identity(len(c), c.p))


def retarget(f: FilteredChainMap, source: FilteredComplex,
             target: FilteredComplex) -> FilteredChainMap:
    """Reinterpret f between shifted copies of its endpoints.

    The new endpoints must have the same ids and degrees in the same
    order (only filtration levels may differ)."""
    for c_old, c_new in ((f.source, source), (f.target, target)):
        if [(g.gid, g.degree) for g in c_old.generators] != \
           [(g.gid, g.degree) for g in c_new.generators]:
            raise ValueError("retarget endpoints are not shifted copies")
    return FilteredChainMap(source, target, f.degree, f.matrix)


def map_shift(f: FilteredChainMap) -> float:
    return f.shift()


def compose(f: FilteredChainMap, g: FilteredChainMap) -> FilteredChainMap:
    """g after f: source(f) -> target(g).  Shifts add: ell <= ell(f)+ell(g)."""
    if f.target != g.source:
        raise ValueError("compose endpoint mismatch")
    return FilteredChainMap(f.source, g.target, f.degree + g.degree,
                            g.matrix @ f.matrix)


def shift_map(f: FilteredChainMap, r: float) -> FilteredChainMap:
    """Sigma^r f: same matrix between shifted endpoints."""
    return FilteredChainMap(f.source.shift(r), f.target.shift(r),
                            f.degree, f.matrix)


def translate_map(f: FilteredChainMap, k: int) -> FilteredChainMap:
    """T^k f: same matrix, degrees shifted (sign convention: none)."""
    return FilteredChainMap(f.source.translate(k), f.target.translate(k),
                            f.degree, f.matrix)


def hom_differential(f: FilteredChainMap) -> FilteredChainMap:
    """d(f) = d_Y o f - (-1)^{|f|} f o d_X."""
    x, y = f.source, f.target
    df = FilteredChainMap(x, y, f.degree + 1, y.boundary @ f.matrix)
    fd = FilteredChainMap(x, y, f.degree + 1, f.matrix @ x.boundary)
    sign = -1 if f.degree % 2 else 1
    return df - fd.scale(sign)


def is_chain_map(f: FilteredChainMap) -> bool:
    return hom_differential(f).is_zero()


# -- the hom complex ---------------------------------------------------


@dataclass(frozen=True)
class HomComplex:
    """hom(X, Y) as a filtered complex of elementary maps.

    Generator #k corresponds to the elementary map sending source
    generator pairs[k][0] to target generator pairs[k][1]; its degree is
    deg(y) - deg(x) and its level is ell(y) - ell(x)."""

    source: FilteredComplex
    target: FilteredComplex
    complex: FilteredComplex
    pairs: Tuple[Tuple[int, int], ...]

    def vector_of(self, f: FilteredChainMap) -> Vector:
        if f.source != self.source or f.target != self.target:
            raise ValueError("map does not belong to this hom complex")
        pos = {pair: k for k, pair in enumerate(self.pairs)}
        return {pos[(c, r)]: v for r, c, v in f.matrix.entries}

    def map_of(self, vec: Vector, degree: int) -> FilteredChainMap:
        entries = []
        for k, v in vec.items():
            c, r = self.pairs[k]
            entries.append((r, c, v))
        mat = SparseMatrix.from_entries(
            len(self.target), len(self.source), self.source.p, entries)
        return FilteredChainMap(self.source, self.target, degree, mat)


def _hom_gid(x: Generator, y: Generator) -> str:
    return f"{x.gid}>{y.gid}"


def hom_complex(x: FilteredComplex, y: FilteredComplex) -> HomComplex:
    """The morphism complex with d(f) = d_Y f - (-1)^{|f|} f d_X."""
    if x.p != y.p:
        raise ValueError("hom of complexes over different fields")
    p = x.p
    gens = []
    pair_list = []
    for i, gx in enumerate(x.generators):
        for j, gy in enumerate(y.generators):
            gens.append((_hom_gid(gx, gy), gy.degree - gx.degree,
                         y.filt(j) - x.filt(i)))
            pair_list.append((i, j))
    order = {g[0]: k for k, g in enumerate(gens)}
    entries = []
    # d_Y o e_{x,y} = sum_z B_Y[z,y] e_{x,z}
    for i, gx in enumerate(x.generators):
        for r, c, v in y.boundary.entries:
            entries.append((_hom_gid(gx, y.generators[c]),
                            _hom_gid(gx, y.generators[r]), v))
    # -(-1)^{|e|} e_{x,y} o d_X = -(-1)^{|e|} sum_w B_X[x,w] e_{w,y}
    for j, gy in enumerate(y.generators):
        for r, c, v in x.boundary.entries:
            deg_e = gy.degree - x.degree(r)
            sign = -1 if deg_e % 2 else 1
            entries.append((_hom_gid(x.generators[r], gy),
                            _hom_gid(x.generators[c], gy), -sign * v))
    cx = FilteredComplex.build(p, gens, entries)
    # align pair metadata with the canonical sort of the hom basis
    pairs_by_gid = {gens[k][0]: pair_list[k] for k in range(len(gens))}
    pairs = tuple(pairs_by_gid[g.gid] for g in cx.generators)
    return HomComplex(x, y, cx, pairs)


# -- generic affine solver over unknown maps --------------------------


@dataclass(frozen=True)
class UnknownMap:
    name: str
    source: FilteredComplex
    target: FilteredComplex
    degree: int
    shift: float  # entries restricted to ell(tgt) <= ell(src) + shift


@dataclass(frozen=True)
class Term:
    """coeff * pre o U o post, with identity for a missing pre/post."""
    name: str
    pre: Optional[FilteredChainMap] = None
    post: Optional[FilteredChainMap] = None
    coeff: int = 1


@dataclass(frozen=True)
class MapEquation:
    """sum(terms) = rhs between fixed endpoints."""
    terms: Tuple[Term, ...]
    rhs: Optional[FilteredChainMap]
    source: FilteredComplex
    target: FilteredComplex
    degree: int


def equation(terms: Sequence[Term], rhs: Optional[FilteredChainMap],
             source: FilteredComplex, target: FilteredComplex,
             degree: int) -> MapEquation:
    return MapEquation(tuple(terms), rhs, source, target, degree)


def _allowed_positions(u: UnknownMap) -> List[Tuple[int, int]]:
    out = []
    for c in range(len(u.source)):
        for r in range(len(u.target)):
            if u.target.degree(r) != u.source.degree(c) + u.degree:
                continue
            if u.target.filt(r) > u.source.filt(c) + u.shift:
                continue
            out.append((r, c))
    return out


def solve_map_system(unknowns: Sequence[UnknownMap],
                     equations: Sequence[MapEquation],
                     want_basis: bool = False,
                     ) -> Optional[Tuple[Dict[str, FilteredChainMap],
                                         List[Dict[str, FilteredChainMap]]]]:
    """Solve a linear system whose unknowns are filtration-bounded maps.

    Returns (particular, nullspace basis) as dicts keyed by unknown name,
    or None when infeasible.  Both outputs are deterministic.
    """
    u_by_name = {u.name: u for u in unknowns}
    if len(u_by_name) != len(unknowns):
        raise ValueError("duplicate unknown names")
    positions: Dict[str, List[Tuple[int, int]]] = {}
    offset: Dict[str, int] = {}
    nvars = 0
    for u in unknowns:
        pos = _allowed_positions(u)
        positions[u.name] = pos
        offset[u.name] = nvars
        nvars += len(pos)

    row_index: Dict[Tuple[int, int, int], int] = {}
    coeffs: Dict[Tuple[int, int], int] = {}  # (row, var) -> coeff
    rhs: Vector = {}
    p = unknowns[0].source.p if unknowns else 2

    def row_of(eq_i: int, i: int, j: int) -> int:
        key = (eq_i, i, j)
        if key not in row_index:
            row_index[key] = len(row_index)
        return row_index[key]

    for eq_i, eq in enumerate(equations):
        for term in eq.terms:
            u = u_by_name[term.name]
            pre, post = term.pre, term.post
            if pre is not None and (pre.source != u.target
                                    or pre.target != eq.target):
                raise ValueError(f"term {term.name}: pre endpoints mismatch")
            if post is not None and (post.source != eq.source
                                     or post.target != u.source):
                raise ValueError(f"term {term.name}: post endpoints mismatch")
            if pre is None and u.target != eq.target:
                raise ValueError(f"term {term.name}: target mismatch")
            if post is None and u.source != eq.source:
                raise ValueError(f"term {term.name}: source mismatch")
            pre_cols: Optional[Dict[int, Dict[int, int]]] = None
            if pre is not None:
                pre_cols = {}
                for i, a, v in pre.matrix.entries:
                    pre_cols.setdefault(a, {})[i] = v
            post_rows: Optional[Dict[int, Dict[int, int]]] = None
            if post is not None:
                post_rows = {}
                for b, j, v in post.matrix.entries:
                    post_rows.setdefault(b, {})[j] = v
            for k, (a, b) in enumerate(positions[term.name]):
                var = offset[term.name] + k
                outs_i = pre_cols.get(a, {}) if pre is not None else {a: 1}
                ins_j = post_rows.get(b, {}) if post is not None else {b: 1}
                for i, vi in outs_i.items():
                    for j, vj in ins_j.items():
                        key = (row_of(eq_i, i, j), var)
                        coeffs[key] = (coeffs.get(key, 0)
                                       + term.coeff * vi * vj) % p
        if eq.rhs is not None:
            if eq.rhs.source != eq.source or eq.rhs.target != eq.target:
                raise ValueError("equation rhs endpoints mismatch")
            for i, j, v in eq.rhs.matrix.entries:
                r = row_of(eq_i, i, j)
                rhs[r] = (rhs.get(r, 0) + v) % p

    a = SparseMatrix.from_entries(
        max(len(row_index), 1), max(nvars, 1), p,
        ((r, c, v) for (r, c), v in coeffs.items()))
    res = solve_affine(a, rhs, list(range(nvars)))
    if res is None:
        return None
    particular, basis = res

    def unpack(vec: Vector) -> Dict[str, FilteredChainMap]:
        out: Dict[str, FilteredChainMap] = {}
        for u in unknowns:
            ents = []
            for k, (r, c) in enumerate(positions[u.name]):
                v = vec.get(offset[u.name] + k, 0)
                if v:
                    ents.append((r, c, v))
            mat = SparseMatrix.from_entries(
                len(u.target), len(u.source), p, ents)
            out[u.name] = FilteredChainMap(u.source, u.target, u.degree, mat)
        return out

    basis_maps = [unpack(v) for v in basis] if want_basis else []
    return unpack(particular), basis_maps


# -- homotopies ---------------------------------------------------------


def find_homotopy(f: FilteredChainMap, g: FilteredChainMap, s: float
                  ) -> Optional[FilteredChainMap]:
    """Find h with d(h) = f - g and ell(h) <= s, i.e. certify f ~_s g."""
    f._check_parallel(g)
    diff = f - g
    if diff.is_zero():
        return zero_map(f.source, f.target, f.degree - 1)
    if s == NEG_INF:
        return None
    h = UnknownMap("h", f.source, f.target, f.degree - 1, s)
    sign = -1 if h.degree % 2 else 1
    eq = equation(
        [Term("h", pre=FilteredChainMap(f.target, f.target, 1,
                                        f.target.boundary)),
         Term("h", post=FilteredChainMap(f.source, f.source, 1,
                                         f.source.boundary), coeff=-sign)],
        diff, f.source, f.target, f.degree)
    res = solve_map_system([h], [eq])
    if res is None:
        return None
    return res[0]["h"]


def is_homotopic(f: FilteredChainMap, g: FilteredChainMap, s: float) -> bool:
    return find_homotopy(f, g, s) is not None


def homotopy_shift_candidates(f_like: FilteredChainMap) -> List[float]:
    """Filtration differences reachable by a homotopy for this map shape."""
    src, tgt, deg = f_like.source, f_like.target, f_like.degree - 1
    vals = set()
    for c in range(len(src)):
        for r in range(len(tgt)):
            if tgt.degree(r) == src.degree(c) + deg:
                vals.add(tgt.filt(r) - src.filt(c))
    return sorted(vals)


def min_homotopy_shift(f: FilteredChainMap, g: FilteredChainMap) -> float:
    """Minimal s with f ~_s g; -inf when f == g, +inf when never homotopic.

    The minimum is attained on the finite set of filtration differences,
    so no numeric tolerance is involved."""
    f._check_parallel(g)
    if (f - g).is_zero():
        return NEG_INF
    cands = homotopy_shift_candidates(f)
    if not cands or not is_homotopic(f, g, cands[-1]):
        return INF
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if is_homotopic(f, g, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]


# -- mapping cones -------------------------------------------------------


@dataclass(frozen=True)
class ConeResult:
    """Cone(f) = target + T(source) with the triangle inclusion/projection.

    tgt_pos/src_pos send a cone basis index to the parent index in the
    target (resp. translated source) block."""

    complex: FilteredComplex
    incl: FilteredChainMap
    proj: FilteredChainMap
    tgt_pos: Dict[int, int]
    src_pos: Dict[int, int]


def cone(f: FilteredChainMap) -> ConeResult:
    """Mapping cone of a degree-0 chain map with ell(f) <= 0."""
    if f.degree != 0:
        raise ValueError("cone requires a degree-0 map")
    if f.shift() > 0:
        raise ValueError(f"cone requires ell(f) <= 0, got {f.shift()}")
    if not is_chain_map(f):
        raise ValueError("cone requires a chain map")
    x, y = f.source, f.target
    tx = x.translate(1)
    if x.is_zero():
        return ConeResult(y, identity_map(y), zero_map(y, tx),
                          {i: i for i in range(len(y))}, {})
    if y.is_zero():
        return ConeResult(tx, zero_map(y, tx), identity_map(tx),
                          {}, {i: i for i in range(len(tx))})
    gens: List[Tuple[str, int, float]] = []
    for i, g in enumerate(y.generators):
        gens.append(("L." + g.gid, g.degree, y.filt(i)))
    for i, g in enumerate(tx.generators):
        gens.append(("R." + g.gid, g.degree, tx.filt(i)))
    bnd: List[Tuple[str, str, int]] = []
    for r, c, v in y.boundary.entries:
        bnd.append(("L." + y.gid(c), "L." + y.gid(r), v))
    for r, c, v in tx.boundary.entries:
        bnd.append(("R." + tx.gid(c), "R." + tx.gid(r), v))
    for r, c, v in f.matrix.entries:  # the f-block: T(source) -> target
        bnd.append(("R." + x.gid(c), "L." + y.gid(r), v))
    cx = FilteredComplex.build(x.p, gens, bnd)
    tgt_pos: Dict[int, int] = {}
    src_pos: Dict[int, int] = {}
    incl_entries = []
    proj_entries = []
    for k, g in enumerate(cx.generators):
        if g.gid.startswith("L."):
            i = y.index(g.gid[2:])
            tgt_pos[k] = i
            incl_entries.append((k, i, 1))
        else:
            i = tx.index(g.gid[2:])
            src_pos[k] = i
            proj_entries.append((i, k, 1))
    incl = FilteredChainMap(
        y, cx, 0,
        SparseMatrix.from_entries(len(cx), len(y), x.p, incl_entries))
    proj = FilteredChainMap(
        cx, tx, 0,
        SparseMatrix.from_entries(len(tx), len(cx), x.p, proj_entries))
    return ConeResult(cx, incl, proj, tgt_pos, src_pos)


# -- spectral invariant ---------------------------------------------------


def spectral_invariant(f: FilteredChainMap):
    """sigma([f]): lowest level representing the colimit class of f.

    Computed from the normal form of hom(source, target): the maximum
    birth among the infinite bars supporting [f].  Returns None when the
    class vanishes at infinity (the "vanishes-at-infinity" marker)."""
    from .persistence import normal_form

    if not is_chain_map(f):
        raise ValueError("spectral invariant requires a chain-map cycle")
    if f.is_zero():
        return None
    hc = hom_complex(f.source, f.target)
    nf = normal_form(hc.complex)
    vec = hc.vector_of(f)
    coeffs = nf.to_normal.matrix.apply(vec)
    births = [nf.normal.filt(k) for k in coeffs if k in nf.infinite_positions]
    if not births:
        return None
    return max(births)


# -- homotopy classes (brute-force support) -------------------------------


def chain_map_space(x: FilteredComplex, y: FilteredComplex, degree: int,
                    shift: float) -> List[FilteredChainMap]:
    """Basis of the space of chain maps x -> y with ell <= shift."""
    u = UnknownMap("f", x, y, degree, shift)
    sign = -1 if degree % 2 else 1
    eq = equation(
        [Term("f", pre=FilteredChainMap(y, y, 1, y.boundary)),
         Term("f", post=FilteredChainMap(x, x, 1, x.boundary), coeff=-sign)],
        None, x, y, degree + 1)
    res = solve_map_system([u], [eq], want_basis=True)
    assert res is not None
    return [b["f"] for b in res[1]]


def homotopy_class_reps(x: FilteredComplex, y: FilteredComplex,
                        degree: int, shift: float, budget: int = 4096
                        ) -> List[FilteredChainMap]:
    """Representatives of {chain maps of ell <= shift} / ~_shift.

    Exhaustive over the quotient vector space; raises BudgetExceeded when
    p^dim exceeds the budget."""
    p = x.p
    cycles = chain_map_space(x, y, degree, shift)
    hc = hom_complex(x, y)
    # boundaries of allowed homotopies, as vectors in the hom basis
    hshape = zero_map(x, y, degree)
    h_unknown = UnknownMap("h", x, y, degree - 1, shift)
    h_positions = _allowed_positions(h_unknown)
    boundary_vecs: List[Vector] = []
    for (r, c) in h_positions:
        h = FilteredChainMap(
            x, y, degree - 1,
            SparseMatrix.from_entries(len(y), len(x), p, [(r, c, 1)]))
        boundary_vecs.append(hc.vector_of(hom_differential(h)))
    # reduce cycle vectors modulo the boundary span
    dim_h = len(hc.complex)
    cols: List[Tuple[int, Vector]] = []  # (kind, column) kind 0=boundary
    mat_entries = []
    col = 0
    for v in boundary_vecs:
        for rr, vv in v.items():
            mat_entries.append((rr, col, vv))
        col += 1
    n_bnd = col
    for f in cycles:
        for rr, vv in hc.vector_of(f).items():
            mat_entries.append((rr, col, vv))
        col += 1
    mat = SparseMatrix.from_entries(max(dim_h, 1), max(col, 1), p, mat_entries)
    from .field_linalg import reduce_columns
    reduced, pivots = reduce_columns(mat)
    free = [k - n_bnd for k in range(n_bnd, col) if k in pivots]
    if p ** len(free) > budget:
        raise BudgetExceeded(
            f"{p ** len(free)} homotopy classes exceed budget {budget}")
    reps: List[FilteredChainMap] = []

    def rec(i: int, acc: FilteredChainMap):
        if i == len(free):
            reps.append(acc)
            return
        for coeff in range(p):
            rec(i + 1, acc + cycles[free[i]].scale(coeff))

    rec(0, hshape)
    return reps
