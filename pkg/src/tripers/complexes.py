"""Filtered cochain complexes over GF(p).

A complex is a finite graded basis with real filtration levels and a
boundary matrix that raises degree by one and never raises filtration.
Shifting the filtration is O(1) (a shared offset), so shift round-trips
are exact in floating point: shift(shift(C, r), -r) == C bitwise.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .field_linalg import SparseMatrix, check_prime

DEFAULT_P = 2


@dataclass(frozen=True)
class Generator:
    gid: str
    degree: int
    filt: float


def _canonical_key(g: Generator, offset: float):
    return (g.degree, g.filt + offset, g.gid)


@dataclass(frozen=True)
class FilteredComplex:
    """Objects of the homotopy category of filtered cochain complexes.

    `boundary` is indexed by the generator basis on both sides:
    boundary[i, j] is the coefficient of generator i in d(generator j).
    The effective filtration of generator i is generators[i].filt + offset.
    """

    p: int
    generators: Tuple[Generator, ...]
    boundary: SparseMatrix
    offset: float = 0.0

    # -- construction -------------------------------------------------

    @staticmethod
    def build(p: int,
              gens: Iterable[Tuple[str, int, float]],
              boundary: Iterable[Tuple[str, str, int]] = (),
              ) -> "FilteredComplex":
        """Build from (gid, degree, filt) triples and (src, tgt, coeff)
        boundary entries; sorts the basis into canonical order."""
        check_prime(p)
        glist = [Generator(gid, deg, float(f)) for gid, deg, f in gens]
        ids = [g.gid for g in glist]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate generator ids")
        glist.sort(key=lambda g: (g.degree, g.filt, g.gid))
        index = {g.gid: i for i, g in enumerate(glist)}
        entries = []
        for src, tgt, coeff in boundary:
            if src not in index or tgt not in index:
                raise ValueError(f"boundary references unknown id {src}->{tgt}")
            entries.append((index[tgt], index[src], coeff))
        mat = SparseMatrix.from_entries(len(glist), len(glist), p, entries)
        return FilteredComplex(p, tuple(glist), mat, 0.0)

    @staticmethod
    def zero(p: int = DEFAULT_P) -> "FilteredComplex":
        return FilteredComplex(p, (), SparseMatrix.zero(0, 0, p), 0.0)

    # -- basic access --------------------------------------------------

    def __len__(self) -> int:
        return len(self.generators)

    def filt(self, i: int) -> float:
        return self.generators[i].filt + self.offset

    def degree(self, i: int) -> int:
        return self.generators[i].degree

    def gid(self, i: int) -> str:
        return self.generators[i].gid

    def index(self, gid: str) -> int:
        for i, g in enumerate(self.generators):
            if g.gid == gid:
                return i
        raise KeyError(gid)

    def is_zero(self) -> bool:
        return not self.generators

    def _signature(self):
        return (self.p,
                tuple((g.gid, g.degree, g.filt + self.offset)
                      for g in self.generators),
                self.boundary.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FilteredComplex):
            return NotImplemented
        return self._signature() == other._signature()

    def __hash__(self) -> int:
        return hash(self._signature())

    # -- invariant checking ---------------------------------------------

    def validate(self) -> List[str]:
        """Empty list iff this is a valid filtered cochain complex."""
        out: List[str] = []
        n = len(self.generators)
        if self.boundary.rows != n or self.boundary.cols != n:
            out.append("shape: boundary matrix does not match basis")
            return out
        if self.boundary.p != self.p:
            out.append("field: boundary characteristic mismatch")
        order = [(g.degree, self.filt(i), g.gid)
                 for i, g in enumerate(self.generators)]
        if order != sorted(order):
            out.append("order: basis not in canonical order")
        for r, c, _ in self.boundary.entries:
            if self.degree(r) != self.degree(c) + 1:
                out.append(f"degree: d({self.gid(c)}) hits {self.gid(r)}")
            if self.filt(r) > self.filt(c):
                out.append(f"filtration: d({self.gid(c)}) raises level "
                           f"at {self.gid(r)}")
        if not (self.boundary @ self.boundary).is_zero():
            out.append("d-squared: boundary does not square to zero")
        return out

    # -- functors --------------------------------------------------------

    def materialized(self) -> "FilteredComplex":
        """Fold the offset into the raw filtration values."""
        if self.offset == 0.0:
            return self
        gens = tuple(Generator(g.gid, g.degree, g.filt + self.offset)
                     for g in self.generators)
        return FilteredComplex(self.p, gens, self.boundary, 0.0)

    def shift(self, r: float) -> "FilteredComplex":
        """Shift functor: every filtration level increases by r."""
        if r == 0:
            return self
        return replace(self, offset=self.offset + r)

    def translate(self, k: int) -> "FilteredComplex":
        """Translation functor T^k: degrees drop by k, boundary gains
        the sign (-1)^k, filtration unchanged."""
        if k == 0:
            return self
        gens = tuple(Generator(g.gid, g.degree - k, g.filt)
                     for g in self.generators)
        mat = self.boundary if k % 2 == 0 else self.boundary.scale(-1)
        return replace(self, generators=gens, boundary=mat)

    def direct_sum(self, other: "FilteredComplex",
                   prefixes: Tuple[str, str] = ("L.", "R.")
                   ) -> "FilteredComplex":
        if self.p != other.p:
            raise ValueError("direct sum of complexes over different fields")
        if self.is_zero() and not prefixes[1]:
            return other
        gens: List[Tuple[str, int, float]] = []
        for i, g in enumerate(self.generators):
            gens.append((prefixes[0] + g.gid, g.degree, self.filt(i)))
        for i, g in enumerate(other.generators):
            gens.append((prefixes[1] + g.gid, g.degree, other.filt(i)))
        bnd = []
        for r, c, v in self.boundary.entries:
            bnd.append((prefixes[0] + self.gid(c), prefixes[0] + self.gid(r), v))
        for r, c, v in other.boundary.entries:
            bnd.append((prefixes[1] + other.gid(c), prefixes[1] + other.gid(r), v))
        return FilteredComplex.build(self.p, gens, bnd)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "generators": [
                {"id": g.gid, "deg": g.degree, "filt": self.filt(i)}
                for i, g in enumerate(self.generators)],
            "boundary": [
                {"from": self.gid(c), "to": self.gid(r), "coeff": v}
                for r, c, v in self.boundary.entries],
        }

    @staticmethod
    def from_json_dict(data: dict) -> "FilteredComplex":
        return FilteredComplex.build(
            int(data.get("p", DEFAULT_P)),
            [(g["id"], int(g["deg"]), float(g["filt"]))
             for g in data["generators"]],
            [(b["from"], b["to"], int(b["coeff"]))
             for b in data.get("boundary", [])])

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "FilteredComplex":
        return FilteredComplex.from_json_dict(json.loads(text))


# -- interval complexes ------------------------------------------------


def e1(a: float, p: int = DEFAULT_P, gid: str = "x",
       degree: int = 0) -> FilteredComplex:
    """One closed generator at level a: the interval [a, infinity)."""
    return FilteredComplex.build(p, [(gid, degree, a)])


def e2(c: float, d: float, p: int = DEFAULT_P, kappa: int = 1,
       degree: int = 0, gid_y: str = "y", gid_x: str = "x"
       ) -> FilteredComplex:
    """Two generators y (level c) -> x (level d), dy = kappa*x, c >= d.

    The sublevel homology is the interval [d, c) one degree above y;
    c == d gives a 0-acyclic complex with empty barcode.
    """
    if c < d:
        raise ValueError(f"e2 requires c >= d, got c={c} < d={d}")
    if kappa % p == 0:
        raise ValueError("kappa must be nonzero in the field")
    return FilteredComplex.build(
        p,
        [(gid_y, degree, c), (gid_x, degree + 1, d)],
        [(gid_y, gid_x, kappa)])


def interval_complex(kind: str, *params: float, p: int = DEFAULT_P
                     ) -> FilteredComplex:
    """Build E1(a) or E2(c, d) by name."""
    if kind == "E1":
        (a,) = params
        return e1(a, p)
    if kind == "E2":
        c, d = params
        return e2(c, d, p)
    raise ValueError(f"unknown interval complex kind {kind!r}")
