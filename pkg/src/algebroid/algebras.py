"""Finite-dimensional associative algebras with exact structure constants.

Structure constants are dense (base algebras are tiny); elements are sparse
coefficient dicts index -> scalar.  Constructors cover function algebras on a
finite point set, matrix algebras, group algebras from a multiplication
table, the opposite algebra, and the enveloping algebra A (x) A^op.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .linalg import Vec, add_into, scaled, vec_eq
from .scalars import Scalar


class DuplicateLabel(ValueError):
    pass


class NotAGroup(ValueError):
    pass


class AlgebraError(ValueError):
    """Structure constants violate associativity or the unit law."""


class FiniteAlgebra:
    """Associative unital algebra over the scalar field.

    c[i][j] is the sparse product e_i * e_j; unit is a sparse column.
    The commutative flag is derived from the structure constants.
    """

    def __init__(self, labels: Sequence[str], c, unit: Vec, name: str = "",
                 validate: bool = True):
        if len(set(labels)) != len(labels):
            raise DuplicateLabel("algebra basis labels must be distinct")
        self.labels = list(labels)
        self.dim = len(self.labels)
        self.index = {l: i for i, l in enumerate(self.labels)}
        self.c = c
        self.unit = {k: v for k, v in unit.items() if v}
        self.name = name or "A"
        self.commutative = all(
            vec_eq(self.c[i][j], self.c[j][i])
            for i in range(self.dim) for j in range(self.dim))
        if validate:
            self.validate()

    # -- arithmetic on sparse elements --------------------------------------

    def mul(self, u: Vec, v: Vec) -> Vec:
        out: Vec = {}
        for i, a in u.items():
            row = self.c[i]
            for j, b in v.items():
                add_into(out, row[j], a * b)
        return out

    def basis_elem(self, i: int) -> Vec:
        return {i: Fraction(1)}

    def elem(self, label: str) -> Vec:
        return {self.index[label]: Fraction(1)}

    def show(self, u: Vec) -> str:
        from .scalars import format_scalar
        if not u:
            return "0"
        parts = []
        for i in sorted(u):
            c = format_scalar(u[i])
            parts.append(f"({c})*{self.labels[i]}" if c not in ("1",) else self.labels[i])
        return " + ".join(parts)

    # -- invariants ----------------------------------------------------------

    def validate(self):
        d = self.dim
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    left = self.mul(self.c[i][j], {k: 1})
                    right = self.mul({i: 1}, self.c[j][k])
                    if not vec_eq(left, right):
                        raise AlgebraError(
                            f"associativity fails at ({self.labels[i]},"
                            f"{self.labels[j]},{self.labels[k]})")
        for i in range(d):
            if not vec_eq(self.mul(self.unit, {i: 1}), {i: 1}):
                raise AlgebraError(f"unit fails on left of {self.labels[i]}")
            if not vec_eq(self.mul({i: 1}, self.unit), {i: 1}):
                raise AlgebraError(f"unit fails on right of {self.labels[i]}")

    def __repr__(self):
        return f"<{self.name}: dim {self.dim}>"


def _empty_c(d: int):
    return [[{} for _ in range(d)] for _ in range(d)]


def new_function_algebra(labels: Sequence[str]) -> FiniteAlgebra:
    """Commutative algebra of functions on a finite set: f_p f_q = delta f_p."""
    if not labels:
        raise DuplicateLabel("need at least one point")
    labels = list(labels)
    d = len(labels)
    if len(set(labels)) != d:
        raise DuplicateLabel("point names must be distinct")
    c = _empty_c(d)
    for i in range(d):
        c[i][i] = {i: Fraction(1)}
    unit = {i: Fraction(1) for i in range(d)}
    return FiniteAlgebra(labels, c, unit, name=f"k({','.join(labels)})")


def new_matrix_algebra(n: int) -> FiniteAlgebra:
    """Full matrix algebra with basis E_ij, E_ij E_kl = delta_jk E_il."""
    if n < 1:
        raise ValueError("matrix size must be >= 1")
    labels = [f"E{i+1}{j+1}" for i in range(n) for j in range(n)]
    d = n * n
    c = _empty_c(d)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    if j == k:
                        c[i * n + j][k * n + l] = {i * n + l: Fraction(1)}
    unit = {i * n + i: Fraction(1) for i in range(n)}
    return FiniteAlgebra(labels, c, unit, name=f"M{n}")


def new_group_algebra(elements: Sequence[str], mult_table) -> FiniteAlgebra:
    """Group algebra from a multiplication table.

    mult_table[i][j] is the label of elements[i]*elements[j].  The table must
    be a Latin square with a two-sided identity and associative; otherwise
    NotAGroup.
    """
    elements = list(elements)
    n = len(elements)
    if len(set(elements)) != n or n == 0:
        raise DuplicateLabel("group element names must be distinct and nonempty")
    idx = {g: i for i, g in enumerate(elements)}
    try:
        t = [[idx[mult_table[i][j]] for j in range(n)] for i in range(n)]
    except (KeyError, IndexError) as e:
        raise NotAGroup(f"malformed multiplication table: {e}")
    for i in range(n):
        if len({t[i][j] for j in range(n)}) != n:
            raise NotAGroup(f"row {elements[i]} is not a permutation")
        if len({t[j][i] for j in range(n)}) != n:
            raise NotAGroup(f"column {elements[i]} is not a permutation")
    ident = None
    for e in range(n):
        if all(t[e][j] == j and t[j][e] == j for j in range(n)):
            ident = e
            break
    if ident is None:
        raise NotAGroup("no two-sided identity element")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if t[t[i][j]][k] != t[i][t[j][k]]:
                    raise NotAGroup(
                        f"associativity fails at ({elements[i]},{elements[j]},"
                        f"{elements[k]})")
    c = _empty_c(n)
    for i in range(n):
        for j in range(n):
            c[i][j] = {t[i][j]: Fraction(1)}
    return FiniteAlgebra(elements, c, {ident: Fraction(1)},
                         name=f"k[{','.join(elements)}]")


def opposite(A: FiniteAlgebra) -> FiniteAlgebra:
    c = [[A.c[j][i] for j in range(A.dim)] for i in range(A.dim)]
    return FiniteAlgebra(A.labels, c, A.unit, name=A.name + "^op")


def enveloping(A: FiniteAlgebra) -> FiniteAlgebra:
    """A^e = A (x) A^op; basis label 'a|b' means a (x) bbar.

    (a (x) bbar)(c (x) dbar) = ac (x) (db)bar.
    """
    d = A.dim
    labels = [f"{A.labels[i]}|{A.labels[j]}" for i in range(d) for j in range(d)]
    c = _empty_c(d * d)
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    prod: Vec = {}
                    left = A.c[i][k]
                    right = A.c[l][j]
                    for m, x in left.items():
                        for n, y in right.items():
                            add_into(prod, {m * d + n: 1}, x * y)
                    c[i * d + j][k * d + l] = prod
    unit: Vec = {}
    for m, x in A.unit.items():
        for n, y in A.unit.items():
            unit[m * d + n] = x * y
    return FiniteAlgebra(labels, c, unit, name=A.name + "^e")
