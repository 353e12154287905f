"""Barcodes, normal forms and distances for filtered complexes.

The reduction orders the basis by filtration level and performs the
standard left-to-right column reduction; the normal form upgrades it to
an explicit filtered isomorphism onto a direct sum of interval
complexes, checkable through the homotopy machinery.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .complexes import FilteredComplex, e1, e2
from .field_linalg import SparseMatrix, Vector, inv_mod
from .morphisms import (FilteredChainMap, BudgetExceeded, NEG_INF, INF,
                        UnknownMap, Term, equation, solve_map_system,
                        eta, homotopy_class_reps, zero_map)

INFINITY = float("inf")


@dataclass(frozen=True)
class Bar:
    degree: int
    birth: float
    death: float  # math.inf for essential classes

    @property
    def length(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class Barcode:
    bars: Tuple[Bar, ...]

    @staticmethod
    def of(bars) -> "Barcode":
        items = tuple(sorted(
            (Bar(b.degree, b.birth, b.death) for b in bars),
            key=lambda b: (b.degree, b.birth, b.death)))
        for b in items:
            if not b.birth < b.death:
                raise ValueError(f"bar {b} must satisfy birth < death")
        return Barcode(items)

    def count_at(self, degree: int, r: float) -> int:
        return sum(1 for b in self.bars
                   if b.degree == degree and b.birth <= r < b.death)

    def degrees(self) -> List[int]:
        return sorted({b.degree for b in self.bars})

    def in_degree(self, degree: int) -> List[Bar]:
        return [b for b in self.bars if b.degree == degree]

    def max_finite_length(self) -> float:
        finite = [b.length for b in self.bars if b.death != INFINITY]
        return max(finite, default=0.0)

    def has_infinite(self) -> bool:
        return any(b.death == INFINITY for b in self.bars)

    def shift(self, r: float) -> "Barcode":
        return Barcode.of(Bar(b.degree, b.birth + r, b.death + r)
                          for b in self.bars)

    def to_json_dict(self) -> dict:
        return {"bars": [
            {"deg": b.degree, "birth": b.birth,
             "death": "inf" if b.death == INFINITY else b.death}
            for b in self.bars]}

    @staticmethod
    def from_json_dict(data: dict) -> "Barcode":
        bars = []
        for b in data.get("bars", []):
            death = b["death"]
            death = INFINITY if death in ("inf", None) else float(death)
            bars.append(Bar(int(b["deg"]), float(b["birth"]), death))
        return Barcode.of(bars)

    def to_csv(self) -> str:
        lines = ["deg,birth,death"]
        for b in self.bars:
            death = "inf" if b.death == INFINITY else repr(b.death)
            lines.append(f"{b.degree},{b.birth!r},{death}")
        return "\n".join(lines) + "\n"


# -- reduction ------------------------------------------------------------


def _filtration_order(c: FilteredComplex) -> List[int]:
    return sorted(range(len(c)),
                  key=lambda i: (c.filt(i), c.degree(i), c.gid(i)))


def _reduce(c: FilteredComplex, track_basis: bool):
    """Column reduction in sublevel order.

    Returns (order, reduced columns, basis columns or None, pivots) where
    pivots maps column position -> pivot row position."""
    p = c.p
    order = _filtration_order(c)
    pos = {orig: k for k, orig in enumerate(order)}
    cols: List[Dict[int, int]] = []
    raw = c.boundary.columns()
    for b in range(len(order)):
        col = {pos[r]: v for r, v in raw.get(order[b], {}).items()}
        cols.append(col)
    vcols: Optional[List[Dict[int, int]]] = None
    if track_basis:
        vcols = [{b: 1} for b in range(len(order))]
    pivot_owner: Dict[int, int] = {}
    pivots: Dict[int, int] = {}
    for b in range(len(order)):
        col = cols[b]
        while col:
            piv = max(col)
            owner = pivot_owner.get(piv)
            if owner is None:
                pivot_owner[piv] = b
                pivots[b] = piv
                break
            factor = (col[piv] * inv_mod(cols[owner][piv], p)) % p
            for r, v in cols[owner].items():
                nv = (col.get(r, 0) - factor * v) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
            if vcols is not None:
                vb, vo = vcols[b], vcols[owner]
                for r, v in vo.items():
                    nv = (vb.get(r, 0) - factor * v) % p
                    if nv:
                        vb[r] = nv
                    else:
                        vb.pop(r, None)
    return order, cols, vcols, pivots


def barcode(c: FilteredComplex) -> Barcode:
    """Barcode of the sublevel persistence homology of a valid complex."""
    diags = c.validate()
    if diags:
        raise ValueError("invalid complex: " + "; ".join(diags))
    order, cols, _, pivots = _reduce(c, track_basis=False)
    bars: List[Bar] = []
    paired_rows = set(pivots.values())
    for b, a in pivots.items():
        birth = c.filt(order[a])
        death = c.filt(order[b])
        if birth < death:
            bars.append(Bar(c.degree(order[a]), birth, death))
    for k in range(len(order)):
        if k in paired_rows or cols[k]:
            continue
        bars.append(Bar(c.degree(order[k]), c.filt(order[k]), INFINITY))
    return Barcode.of(bars)


def persistence_dims(c: FilteredComplex, r: float, degree: int) -> int:
    """dim H^degree(C^{<= r}) by direct Gaussian elimination.

    Independent oracle: does not share code with the column reduction."""
    sub = [i for i in range(len(c)) if c.filt(i) <= r]
    sub_set = set(sub)
    raw = c.boundary.columns()

    def rank_from(cols_deg: int) -> int:
        vecs = []
        for j in sub:
            if c.degree(j) != cols_deg:
                continue
            col = {i: v for i, v in raw.get(j, {}).items() if i in sub_set}
            if col:
                vecs.append(col)
        rank = 0
        pivots: Dict[int, Dict[int, int]] = {}
        for col in vecs:
            col = dict(col)
            while col:
                piv = max(col)
                if piv not in pivots:
                    pivots[piv] = col
                    rank += 1
                    break
                other = pivots[piv]
                f = (col[piv] * inv_mod(other[piv], c.p)) % c.p
                for i, v in other.items():
                    nv = (col.get(i, 0) - f * v) % c.p
                    if nv:
                        col[i] = nv
                    else:
                        col.pop(i, None)
        return rank

    n_deg = sum(1 for i in sub if c.degree(i) == degree)
    return n_deg - rank_from(degree) - rank_from(degree - 1)


# -- normal form ----------------------------------------------------------


@dataclass(frozen=True)
class NormalForm:
    """X = normal form via the filtered isomorphisms to_normal/from_normal.

    `normal` is a direct sum of interval complexes, including the
    0-length two-step pieces that carry no bar.  from_normal o to_normal
    and to_normal o from_normal are the identities on the nose, so the
    homotopy witnesses required of a normal form are the zero maps."""

    barcode: Barcode
    normal: FilteredComplex
    to_normal: FilteredChainMap
    from_normal: FilteredChainMap
    infinite_positions: FrozenSet[int]  # positions of E1 generators in normal


def normal_form(c: FilteredComplex) -> NormalForm:
    diags = c.validate()
    if diags:
        raise ValueError("invalid complex: " + "; ".join(diags))
    p = c.p
    n = len(c)
    order, cols, vcols, pivots = _reduce(c, track_basis=True)
    assert vcols is not None
    paired_rows = set(pivots.values())

    # new basis w_k, expressed in sublevel positions: W[:, k]
    wcols: List[Dict[int, int]] = [dict() for _ in range(n)]
    kind: List[str] = ["free"] * n  # free | birth | death
    partner: Dict[int, int] = {}
    for b, a in pivots.items():
        wcols[b] = dict(vcols[b])
        wcols[a] = dict(cols[b])  # the reduced column: a cycle with lead a
        kind[b] = "death"
        kind[a] = "birth"
        partner[b] = a
        partner[a] = b

    for k in range(n):
        if kind[k] == "free":
            wcols[k] = dict(vcols[k])

    # invert the triangular basis change W (upper triangular in positions)
    winv: List[Dict[int, int]] = [dict() for _ in range(n)]
    diag = [wcols[k].get(k, 0) for k in range(n)]
    for k in range(n):
        u: Dict[int, int] = {k: inv_mod(diag[k], p)}
        for a in range(k - 1, -1, -1):
            s = 0
            for j, uj in u.items():
                if j > a:
                    s = (s + wcols[j].get(a, 0) * uj) % p
            if s:
                u[a] = (-s * inv_mod(diag[a], p)) % p
        winv[k] = {a: v for a, v in u.items() if v}

    # build the normal complex
    gens: List[Tuple[str, int, float]] = []
    bnd: List[Tuple[str, str, int]] = []
    gid_of_pos: Dict[int, str] = {}
    bars: List[Bar] = []
    pair_no = 0
    free_no = 0
    for b in sorted(pivots):
        a = pivots[b]
        gy = f"p{pair_no}.y"
        gx = f"p{pair_no}.x"
        pair_no += 1
        birth, death = c.filt(order[a]), c.filt(order[b])
        gens.append((gy, c.degree(order[b]), death))
        gens.append((gx, c.degree(order[a]), birth))
        bnd.append((gy, gx, 1))
        gid_of_pos[b] = gy
        gid_of_pos[a] = gx
        if birth < death:
            bars.append(Bar(c.degree(order[a]), birth, death))
    for k in range(n):
        if kind[k] != "free":
            continue
        gid = f"i{free_no}"
        free_no += 1
        gens.append((gid, c.degree(order[k]), c.filt(order[k])))
        gid_of_pos[k] = gid
        bars.append(Bar(c.degree(order[k]), c.filt(order[k]), INFINITY))
    normal = FilteredComplex.build(p, gens, bnd)

    g_entries = []  # from_normal: normal -> c
    f_entries = []  # to_normal: c -> normal
    for k in range(n):
        gid = gid_of_pos[k]
        for a, v in wcols[k].items():
            g_entries.append((gid, c.gid(order[a]), v))
        for a, v in winv[k].items():
            f_entries.append((c.gid(order[a]), gid, v))

    from .morphisms import map_from_entries
    from_normal = map_from_entries(normal, c, 0, g_entries)
    to_normal = map_from_entries(c, normal, 0, f_entries)
    inf_pos = frozenset(
        i for i, g in enumerate(normal.generators) if g.gid.startswith("i"))
    return NormalForm(Barcode.of(bars), normal, to_normal, from_normal,
                      inf_pos)


# -- bottleneck distance ---------------------------------------------------


def _deletion_cost(bar: Bar, short_rule: str) -> float:
    if bar.death == INFINITY:
        return INFINITY
    if short_rule == "doubled":
        return 2.0 * bar.length
    if short_rule == "halved":
        return bar.length / 2.0
    raise ValueError(f"unknown short_rule {short_rule!r}")


def _match_cost(x: Bar, y: Bar) -> float:
    if (x.death == INFINITY) != (y.death == INFINITY):
        return INFINITY
    if x.death == INFINITY:
        return abs(x.birth - y.birth)
    return max(abs(x.birth - y.birth), abs(x.death - y.death))


def _max_matching(nl: int, nr: int, adj: List[List[int]]) -> int:
    """Kuhn's augmenting-path maximum bipartite matching."""
    match_r = [-1] * nr

    def try_kuhn(u: int, seen: List[bool]) -> bool:
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_r[v] == -1 or try_kuhn(match_r[v], seen):
                match_r[v] = u
                return True
        return False

    size = 0
    for u in range(nl):
        if try_kuhn(u, [False] * nr):
            size += 1
    return size


def _feasible_degree(xs: List[Bar], ys: List[Bar], tau: float,
                     short_rule: str) -> bool:
    """Partial matching with every unmatched bar deletable at cost <= tau."""
    nx, ny = len(xs), len(ys)
    # vertices: xs + dummy-for-each-y vs ys + dummy-for-each-x
    nl, nr = nx + ny, ny + nx
    adj: List[List[int]] = [[] for _ in range(nl)]
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            if _match_cost(x, y) <= tau:
                adj[i].append(j)
        if _deletion_cost(x, short_rule) <= tau:
            adj[i].append(ny + i)
    for j, y in enumerate(ys):
        if _deletion_cost(y, short_rule) <= tau:
            adj[nx + j].append(j)
    for j in range(ny):
        for i in range(nx):
            adj[nx + j].append(ny + i)
    return _max_matching(nl, nr, adj) == nl


def bottleneck(b1: Barcode, b2: Barcode, short_rule: str = "doubled"
               ) -> float:
    """Infimal tau admitting a partial matching of the two barcodes.

    Matching cost is the max endpoint difference (birth difference for
    essential bars); an unmatched bar of length L costs 2L under the
    default "doubled" rule and L/2 under the conventional "halved" rule
    used for cross-tool comparison.  Returns +inf when the essential bar
    counts disagree in some degree."""
    degrees = sorted(set(b1.degrees()) | set(b2.degrees()))
    per_degree: List[Tuple[List[Bar], List[Bar]]] = []
    candidates = {0.0}
    for d in degrees:
        xs, ys = b1.in_degree(d), b2.in_degree(d)
        ninf_x = sum(1 for b in xs if b.death == INFINITY)
        ninf_y = sum(1 for b in ys if b.death == INFINITY)
        if ninf_x != ninf_y:
            return INFINITY
        per_degree.append((xs, ys))
        for x in xs:
            c = _deletion_cost(x, short_rule)
            if c != INFINITY:
                candidates.add(c)
            for y in ys:
                c = _match_cost(x, y)
                if c != INFINITY:
                    candidates.add(c)
        for y in ys:
            c = _deletion_cost(y, short_rule)
            if c != INFINITY:
                candidates.add(c)

    def feasible(tau: float) -> bool:
        return all(_feasible_degree(xs, ys, tau, short_rule)
                   for xs, ys in per_degree)

    cand = sorted(candidates)
    lo, hi = 0, len(cand) - 1
    if not feasible(cand[hi]):
        return INFINITY
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(cand[mid]):
            hi = mid
        else:
            lo = mid + 1
    return cand[lo]


# -- interleaving distance -------------------------------------------------


def interleaving(c: FilteredComplex, d: FilteredComplex) -> float:
    """Interleaving distance computed through the normal form.

    For sums of interval complexes the categorical interleaving reduces
    to interval matching where a bar of length L is deletable at cost L/2
    and matched bars cost the max endpoint difference; the chain-level
    brute force (interleaving_bruteforce) validates this reduction on
    small complexes."""
    return bottleneck(barcode(c), barcode(d), short_rule="halved")


def interleaving_candidates(c: FilteredComplex, d: FilteredComplex
                            ) -> List[float]:
    vals = sorted({c.filt(i) for i in range(len(c))}
                  | {d.filt(i) for i in range(len(d))})
    cands = {0.0}
    for a in vals:
        for b in vals:
            if b >= a:
                cands.add(b - a)
                cands.add((b - a) / 2.0)
    return sorted(cands)


def _interleaving_feasible(c: FilteredComplex, d: FilteredComplex,
                           r: float, budget: int) -> bool:
    from .morphisms import FilteredChainMap as FCM
    p = c.p
    shifted_c, shifted_d = c.shift(r), d.shift(r)
    try:
        phis = homotopy_class_reps(shifted_c, d, 0, 0.0, budget)
    except BudgetExceeded:
        raise
    c2, d2 = c.shift(2 * r), d.shift(2 * r)
    eta_c = eta(c, 2 * r)
    eta_d = eta(d, 2 * r)
    bnd_c = FCM(c, c, 1, c.boundary)
    bnd_d = FCM(d, d, 1, d.boundary)
    bnd_c2 = FCM(c2, c2, 1, c.boundary)
    bnd_d2 = FCM(d2, d2, 1, d.boundary)
    for phi in phis:
        unknowns = [
            UnknownMap("psi", shifted_d, c, 0, 0.0),
            UnknownMap("g1", c2, c, -1, 0.0),
            UnknownMap("g2", d2, d, -1, 0.0),
        ]
        # psi is a chain map
        eq_chain = equation(
            [Term("psi", pre=bnd_c),
             Term("psi", post=FCM(shifted_d, shifted_d, 1, d.boundary),
                  coeff=-1)],
            None, shifted_d, c, 1)
        # psi o Sigma^r(phi) - (d g1 + g1 d) = eta_{2r}^C
        sig_phi = FCM(c2, shifted_d, 0, phi.matrix)
        eq1 = equation(
            [Term("psi", post=sig_phi),
             Term("g1", pre=bnd_c, coeff=-1),
             Term("g1", post=bnd_c2, coeff=-1)],
            eta_c, c2, c, 0)
        # phi o Sigma^r(psi) - (d g2 + g2 d) = eta_{2r}^D
        phi_fixed = FCM(shifted_c, d, 0, phi.matrix)

        def eq2_terms():
            # Sigma^r psi has the same matrix as psi, endpoints d2 -> c_r
            post = FCM(d2, shifted_d, 0,
                       SparseMatrix.identity(len(d), p))
            return [Term("psi", pre=FCM(c, d, 0, phi.matrix), post=post),
                    Term("g2", pre=bnd_d, coeff=-1),
                    Term("g2", post=bnd_d2, coeff=-1)]

        eq2 = equation(eq2_terms(), eta_d, d2, d, 0)
        if solve_map_system(unknowns, [eq_chain, eq1, eq2]) is not None:
            return True
    return False


def interleaving_bruteforce(c: FilteredComplex, d: FilteredComplex,
                            budget: int = 4096) -> float:
    """Chain-level interleaving by exhaustive search over homotopy classes.

    Enumerates representatives phi of hom^0(Sigma^r C, D) and solves for a
    partner psi and the two comparison homotopies; min over the finite
    candidate set of shifts."""
    cands = interleaving_candidates(c, d)
    if not _interleaving_feasible(c, d, cands[-1], budget):
        return INFINITY
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _interleaving_feasible(c, d, cands[mid], budget):
            hi = mid
        else:
            lo = mid + 1
    return cands[lo]
