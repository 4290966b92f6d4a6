"""Sparse exact linear algebra over hashable keys.

Vectors are dicts key -> nonzero scalar.  `Eliminator` maintains a reduced
echelon basis of a growing span with deterministic pivots (smallest key under
a caller-supplied sort key) and optional combination tracking, which is what
membership certificates are made of.  `LinearSystem` solves exact systems and
returns a particular solution plus a nullspace basis.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Hashable, Optional

from .scalars import Scalar, recip

Vec = dict  # key -> Scalar, zero values never stored


def add_into(dst: Vec, src: Vec, c: Scalar = 1) -> Vec:
    """dst += c*src in place, dropping cancellations."""
    if not c:
        return dst
    for k, v in src.items():
        w = dst.get(k, 0) + c * v
        if w:
            dst[k] = w
        else:
            dst.pop(k, None)
    return dst


def scaled(u: Vec, c: Scalar) -> Vec:
    if not c:
        return {}
    return {k: c * v for k, v in u.items()}


def vec_sub(u: Vec, v: Vec) -> Vec:
    out = dict(u)
    add_into(out, v, -1)
    return out


def vec_eq(u: Vec, v: Vec) -> bool:
    return not vec_sub(u, v)


class Eliminator:
    """Reduced echelon span with combination tracking.

    Rows are kept pivot-normalized (pivot coefficient 1) and mutually reduced,
    so residuals are canonical normal forms modulo the span.
    """

    def __init__(self, sort_key: Optional[Callable[[Hashable], object]] = None,
                 track: bool = False):
        self.sort_key = sort_key or (lambda k: k)
        self.track = track
        self.rows: dict = {}    # pivot key -> row vec
        self.combos: dict = {}  # pivot key -> combo vec (tag -> Scalar)

    def _pivot(self, v: Vec):
        return min(v, key=self.sort_key)

    def reduce(self, v: Vec, combo: Optional[Vec] = None):
        """Return (residual, combo) with residual = v - (span part)."""
        v = dict(v)
        combo = dict(combo) if combo is not None else ({} if self.track else None)
        while True:
            hit = None
            for k in v:
                if k in self.rows:
                    hit = k
                    break
            if hit is None:
                return v, combo
            c = v[hit]
            add_into(v, self.rows[hit], -c)
            if combo is not None:
                add_into(combo, self.combos[hit], c)

    def insert(self, v: Vec, tag: Hashable = None):
        """Add v to the span.  Returns the residual's pivot key, or None if v
        was already in the span."""
        res, used = self.reduce(v)
        if not res:
            return None
        combo = None
        if self.track:
            # residual = v - (span part), so the tagged generator enters with
            # coefficient 1 and every generator the reduction used with -c.
            combo = {t: -c for t, c in used.items()}
            if tag is not None:
                s = combo.get(tag, 0) + 1
                if s:
                    combo[tag] = s
                else:
                    combo.pop(tag, None)
        p = self._pivot(res)
        inv = recip(res[p])
        res = scaled(res, inv)
        if combo is not None:
            combo = scaled(combo, inv)
        # back-eliminate the new pivot from existing rows
        for k, row in self.rows.items():
            c = row.get(p)
            if c:
                add_into(row, res, -c)
                if self.track:
                    add_into(self.combos[k], combo, -c)
        self.rows[p] = res
        self.combos[p] = combo if combo is not None else {}
        return p

    def membership(self, v: Vec):
        """If v lies in the span, return combo (tag -> coefficient) with
        v = sum(c * generator[tag]); else None.  Requires track=True."""
        res, combo = self.reduce(v, {})
        if res:
            return None
        return combo

    @property
    def rank(self) -> int:
        return len(self.rows)

    def pivots(self):
        return set(self.rows)


class LinearSystem:
    """Exact linear system over named variables; solve() gives a particular
    solution and a nullspace basis, or (None, basis) when inconsistent."""

    RHS = ("#rhs#",)  # sentinel column, sorts after every variable

    def __init__(self, var_key: Optional[Callable[[Hashable], object]] = None):
        vk = var_key or (lambda k: k)
        self._vk = vk
        self.elim = Eliminator(
            sort_key=lambda k: (1,) if k == self.RHS else (0, vk(k)))
        self.vars: dict = {}  # insertion-ordered set of variables

    def add_equation(self, coeffs: Vec, rhs: Scalar = 0):
        """Add an equation; zero coefficients still register the variable."""
        for k in coeffs:
            self.vars.setdefault(k, None)
        row = {k: c for k, c in coeffs.items() if c}
        if rhs:
            row[self.RHS] = -rhs
        if row:
            self.elim.insert(row)

    def solve(self):
        rows = self.elim.rows
        if self.RHS in rows:
            return None, self._nullspace(rows)
        part = {}
        for p, row in rows.items():
            c = row.get(self.RHS, 0)
            if c:
                part[p] = -c  # free variables 0; pivot = -rhs residue
        return part, self._nullspace(rows)

    def _nullspace(self, rows):
        pivots = set(rows)
        free = [v for v in self.vars if v not in pivots]
        basis = []
        for f in sorted(free, key=self._vk):
            vec = {f: Fraction(1)}
            for p, row in rows.items():
                c = row.get(f, 0)
                if c:
                    vec[p] = -c
            basis.append(vec)
        return basis
