"""Finitely generated projective bimodules, tensor products over A, duals.

A bimodule stores both action tensors explicitly; elements are sparse dicts.
Tensor products over A are computed as quotients of the field tensor product
by the middle-jump span m*a (x) n - m (x) a*n, with canonical representatives
given by reduced echelon elimination (pivots on lexicographically largest
keys, so representatives are the least keys).  Dual pairs carry explicit
finite lists for both coevaluations because every downstream formula is an
Einstein sum over them.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Optional, Sequence

from .algebras import FiniteAlgebra
from .linalg import Eliminator, LinearSystem, Vec, add_into, scaled, vec_eq, vec_sub


class BaseMismatch(ValueError):
    pass


class BimoduleError(ValueError):
    """Action tensors violate unitality or associativity."""


class RevKey:
    """Reverses comparison, for max-pivot elimination."""

    __slots__ = ("k",)

    def __init__(self, k):
        self.k = k

    def __lt__(self, other):
        return other.k < self.k

    def __eq__(self, other):
        return self.k == other.k

    def __hash__(self):
        return hash(self.k)


class FgpBimodule:
    """A-bimodule with exact action tensors.

    left[a][m] and right[m][a] are sparse vectors over the module basis.
    """

    def __init__(self, base: FiniteAlgebra, labels: Sequence[str], left, right,
                 name: str = "", validate: bool = True):
        self.base = base
        self.labels = list(labels)
        self.dim = len(self.labels)
        self.index = {l: i for i, l in enumerate(self.labels)}
        self.left = left
        self.right = right
        self.name = name or "M"
        if validate:
            self.validate()

    def act_left(self, a: Vec, m: Vec) -> Vec:
        out: Vec = {}
        for ai, ac in a.items():
            col = self.left[ai]
            for mi, mc in m.items():
                add_into(out, col[mi], ac * mc)
        return out

    def act_right(self, m: Vec, a: Vec) -> Vec:
        out: Vec = {}
        for mi, mc in m.items():
            row = self.right[mi]
            for ai, ac in a.items():
                add_into(out, row[ai], mc * ac)
        return out

    def elem(self, label: str) -> Vec:
        return {self.index[label]: Fraction(1)}

    def basis_elem(self, i: int) -> Vec:
        return {i: Fraction(1)}

    def show(self, m: Vec) -> str:
        from .scalars import format_scalar
        if not m:
            return "0"
        parts = []
        for i in sorted(m):
            c = format_scalar(m[i])
            parts.append(self.labels[i] if c == "1" else f"({c})*{self.labels[i]}")
        return " + ".join(parts)

    def validate(self):
        A, d = self.base, self.dim
        for m in range(d):
            if not vec_eq(self.act_left(A.unit, {m: 1}), {m: 1}):
                raise BimoduleError(f"{self.name}: left unit fails on {self.labels[m]}")
            if not vec_eq(self.act_right({m: 1}, A.unit), {m: 1}):
                raise BimoduleError(f"{self.name}: right unit fails on {self.labels[m]}")
        for i in range(A.dim):
            for j in range(A.dim):
                ab = A.c[i][j]
                for m in range(d):
                    if not vec_eq(self.act_left(ab, {m: 1}),
                                  self.act_left({i: 1}, self.act_left({j: 1}, {m: 1}))):
                        raise BimoduleError(
                            f"{self.name}: left associativity fails at "
                            f"({A.labels[i]},{A.labels[j]},{self.labels[m]})")
                    if not vec_eq(self.act_right({m: 1}, ab),
                                  self.act_right(self.act_right({m: 1}, {i: 1}), {j: 1})):
                        raise BimoduleError(
                            f"{self.name}: right associativity fails at "
                            f"({self.labels[m]},{A.labels[i]},{A.labels[j]})")
        for i in range(A.dim):
            for j in range(A.dim):
                for m in range(d):
                    lhs = self.act_right(self.act_left({i: 1}, {m: 1}), {j: 1})
                    rhs = self.act_left({i: 1}, self.act_right({m: 1}, {j: 1}))
                    if not vec_eq(lhs, rhs):
                        raise BimoduleError(
                            f"{self.name}: actions do not commute at "
                            f"({A.labels[i]},{self.labels[m]},{A.labels[j]})")

    def __repr__(self):
        return f"<{self.name}: dim {self.dim} over {self.base.name}>"


class BimoduleMap:
    """Linear map between bimodules; cols[m] is the image of basis m.

    linearity is "bimodule", "left", "right" or "none" and is validated on
    basis elements at construction.
    """

    def __init__(self, source: FgpBimodule, target: FgpBimodule, cols,
                 linearity: str = "bimodule", name: str = ""):
        if source.base is not target.base:
            raise BaseMismatch("map between bimodules over different algebras")
        self.source, self.target, self.cols = source, target, cols
        self.linearity = linearity
        self.name = name or "f"
        self.validate()

    def apply(self, m: Vec) -> Vec:
        out: Vec = {}
        for mi, mc in m.items():
            add_into(out, self.cols[mi], mc)
        return out

    def validate(self):
        A = self.source.base
        check_left = self.linearity in ("bimodule", "left")
        check_right = self.linearity in ("bimodule", "right")
        for a in range(A.dim):
            av = {a: 1}
            for m in range(self.source.dim):
                mv = {m: 1}
                if check_left and not vec_eq(
                        self.apply(self.source.act_left(av, mv)),
                        self.target.act_left(av, self.apply(mv))):
                    raise BimoduleError(
                        f"{self.name}: not left A-linear at ({A.labels[a]},"
                        f"{self.source.labels[m]})")
                if check_right and not vec_eq(
                        self.apply(self.source.act_right(mv, av)),
                        self.target.act_right(self.apply(mv), av)):
                    raise BimoduleError(
                        f"{self.name}: not right A-linear at "
                        f"({self.source.labels[m]},{A.labels[a]})")


# -- tensor products over A --------------------------------------------------


class TensorSpace:
    """M_1 (x)_A ... (x)_A M_n as a quotient of the field tensor product.

    Keys are index tuples.  The relation span is eliminated in reduced echelon
    form with pivots on the largest keys, so the representative basis is the
    lexicographically least complement; project() returns canonical
    coordinates on the representative keys and section is the identity on
    them.
    """

    def __init__(self, factors: Sequence[FgpBimodule]):
        base = factors[0].base
        for f in factors:
            if f.base is not base:
                raise BaseMismatch("tensor factors over different base algebras")
        self.factors = list(factors)
        self.base = base
        self.span = Eliminator(sort_key=RevKey)
        dims = [f.dim for f in factors]
        keys = list(itertools.product(*[range(d) for d in dims]))
        for pos in range(len(factors) - 1):
            M, N = factors[pos], factors[pos + 1]
            for a in range(base.dim):
                for key in keys:
                    row: Vec = {}
                    for mi, mc in M.right[key[pos]][a].items():
                        k2 = key[:pos] + (mi,) + key[pos + 1:]
                        add_into(row, {k2: 1}, mc)
                    for ni, nc in N.left[a][key[pos + 1]].items():
                        k2 = key[:pos + 1] + (ni,) + key[pos + 2:]
                        add_into(row, {k2: 1}, -nc)
                    if row:
                        self.span.insert(row)
        pivots = self.span.pivots()
        self.rep_keys = [k for k in keys if k not in pivots]
        self.key_index = {k: i for i, k in enumerate(self.rep_keys)}
        self.dim = len(self.rep_keys)

    def project(self, kvec: Vec) -> Vec:
        """Canonical representative of a raw key vector, modulo middle jumps."""
        res, _ = self.span.reduce(kvec)
        return res

    def pure(self, vecs: Sequence[Vec]) -> Vec:
        """Project m_1 (x) ... (x) m_n given sparse coordinates per factor."""
        out: Vec = {(): Fraction(1)}
        for v in vecs:
            nxt: Vec = {}
            for key, c in out.items():
                for i, ci in v.items():
                    add_into(nxt, {key + (i,): 1}, c * ci)
            out = nxt
        return self.project(out)

    def act_left(self, a: Vec, kvec: Vec) -> Vec:
        M = self.factors[0]
        out: Vec = {}
        for key, c in kvec.items():
            img = M.act_left(a, {key[0]: 1})
            for mi, mc in img.items():
                add_into(out, {(mi,) + key[1:]: 1}, c * mc)
        return self.project(out)

    def act_right(self, kvec: Vec, a: Vec) -> Vec:
        M = self.factors[-1]
        out: Vec = {}
        for key, c in kvec.items():
            img = M.act_right({key[-1]: 1}, a)
            for mi, mc in img.items():
                add_into(out, {key[:-1] + (mi,): 1}, c * mc)
        return self.project(out)

    def as_bimodule(self, name: str = "") -> FgpBimodule:
        A = self.base
        labels = ["(x)".join(self.factors[p].labels[k[p]] for p in range(len(k)))
                  for k in self.rep_keys]
        left = [[self._tovec(self.act_left({a: 1}, {k: 1})) for k in self.rep_keys]
                for a in range(A.dim)]
        right = [[self._tovec(self.act_right({k: 1}, {a: 1})) for a in range(A.dim)]
                 for k in self.rep_keys]
        nm = name or "(x)".join(f.name for f in self.factors)
        return FgpBimodule(A, labels, left, right, name=nm)

    def _tovec(self, kvec: Vec) -> Vec:
        return {self.key_index[k]: c for k, c in kvec.items()}

    def to_indices(self, kvec: Vec) -> Vec:
        return self._tovec(self.project(kvec))


def tensor_over_A(*factors: FgpBimodule) -> TensorSpace:
    return TensorSpace(factors)


# -- duality data -------------------------------------------------------------


class DualityData:
    """Two-sided dual pair (Omega, X) with explicit (co)evaluations.

    coev is a list of pairs (omega_i, x_i) with coev(1) = sum omega_i (x) x_i
    in Omega (x)_A X; under_coev is a list of pairs (y_j, rho_j) with
    under_coev(1) = sum y_j (x) rho_j in X (x)_A Omega.  ev[x][omega] and
    under_ev[omega][x] are sparse A-elements on basis pairs.  Pivotality is
    expressed by both sides sharing the same dual module object.
    """

    def __init__(self, module: FgpBimodule, dual: FgpBimodule, coev, ev,
                 under_coev, under_ev):
        self.module = module        # Omega
        self.dual = dual            # X
        self.coev = [(dict(w), dict(x)) for (w, x) in coev]
        self.ev = ev
        self.under_coev = [(dict(y), dict(r)) for (y, r) in under_coev]
        self.under_ev = under_ev

    def ev_apply(self, x: Vec, w: Vec) -> Vec:
        out: Vec = {}
        for xi, xc in x.items():
            row = self.ev[xi]
            for wi, wc in w.items():
                add_into(out, row[wi], xc * wc)
        return out

    def under_ev_apply(self, w: Vec, x: Vec) -> Vec:
        out: Vec = {}
        for wi, wc in w.items():
            row = self.under_ev[wi]
            for xi, xc in x.items():
                add_into(out, row[xi], wc * xc)
        return out


def validate_duality(D: DualityData) -> dict:
    """Exact check of every structural identity of a two-sided dual pair.

    Returns {"ok": bool, "checks": [{name, status, detail}...]}; never raises
    on failure, callers decide.
    """
    A = D.module.base
    W, X = D.module, D.dual
    checks = []

    def post(name, failures):
        checks.append({
            "name": name,
            "status": "PASS" if not failures else "FAIL",
            "detail": "" if not failures else "; ".join(failures[:3]),
        })

    fails = []
    for a in range(A.dim):
        av = {a: 1}
        for x in range(X.dim):
            for w in range(W.dim):
                lhs = D.ev_apply(X.act_right({x: 1}, av), {w: 1})
                rhs = D.ev_apply({x: 1}, W.act_left(av, {w: 1}))
                if not vec_eq(lhs, rhs):
                    fails.append(f"ev(x.a,w) != ev(x,a.w) at ({X.labels[x]},"
                                 f"{A.labels[a]},{W.labels[w]})")
    post("ev_balanced", fails)

    fails = []
    for a in range(A.dim):
        av = {a: 1}
        for x in range(X.dim):
            for w in range(W.dim):
                if not vec_eq(D.ev_apply(X.act_left(av, {x: 1}), {w: 1}),
                              A.mul(av, D.ev_apply({x: 1}, {w: 1}))):
                    fails.append(f"ev not left-linear at ({A.labels[a]},{X.labels[x]})")
                if not vec_eq(D.ev_apply({x: 1}, W.act_right({w: 1}, av)),
                              A.mul(D.ev_apply({x: 1}, {w: 1}), av)):
                    fails.append(f"ev not right-linear at ({W.labels[w]},{A.labels[a]})")
    post("ev_bimodule", fails)

    fails = []
    for a in range(A.dim):
        av = {a: 1}
        for w in range(W.dim):
            for x in range(X.dim):
                lhs = D.under_ev_apply(W.act_right({w: 1}, av), {x: 1})
                rhs = D.under_ev_apply({w: 1}, X.act_left(av, {x: 1}))
                if not vec_eq(lhs, rhs):
                    fails.append(f"under_ev(w.a,x) != under_ev(w,a.x) at "
                                 f"({W.labels[w]},{A.labels[a]},{X.labels[x]})")
    post("under_ev_balanced", fails)

    fails = []
    for a in range(A.dim):
        av = {a: 1}
        for w in range(W.dim):
            for x in range(X.dim):
                if not vec_eq(D.under_ev_apply(W.act_left(av, {w: 1}), {x: 1}),
                              A.mul(av, D.under_ev_apply({w: 1}, {x: 1}))):
                    fails.append(f"under_ev not left-linear at ({A.labels[a]},"
                                 f"{W.labels[w]})")
                if not vec_eq(D.under_ev_apply({w: 1}, X.act_right({x: 1}, av)),
                              A.mul(D.under_ev_apply({w: 1}, {x: 1}), av)):
                    fails.append(f"under_ev not right-linear at ({X.labels[x]},"
                                 f"{A.labels[a]})")
    post("under_ev_bimodule", fails)

    fails = []
    for x in range(X.dim):
        acc: Vec = {}
        for (w_i, x_i) in D.coev:
            add_into(acc, X.act_left(D.ev_apply({x: 1}, w_i), x_i))
        if not vec_eq(acc, {x: 1}):
            fails.append(f"(ev(x)id)(id(x)coev) != id at {X.labels[x]}")
    post("snake_on_dual", fails)

    fails = []
    for w in range(W.dim):
        acc = {}
        for (w_i, x_i) in D.coev:
            add_into(acc, W.act_right(w_i, D.ev_apply(x_i, {w: 1})))
        if not vec_eq(acc, {w: 1}):
            fails.append(f"(id(x)ev)(coev(x)id) != id at {W.labels[w]}")
    post("snake_on_module", fails)

    fails = []
    for x in range(X.dim):
        acc = {}
        for (y_j, r_j) in D.under_coev:
            add_into(acc, X.act_right(y_j, D.under_ev_apply(r_j, {x: 1})))
        if not vec_eq(acc, {x: 1}):
            fails.append(f"(id(x)under_ev)(under_coev(x)id) != id at {X.labels[x]}")
    post("under_snake_on_dual", fails)

    fails = []
    for w in range(W.dim):
        acc = {}
        for (y_j, r_j) in D.under_coev:
            add_into(acc, W.act_left(D.under_ev_apply({w: 1}, y_j), r_j))
        if not vec_eq(acc, {w: 1}):
            fails.append(f"(under_ev(x)id)(id(x)under_coev) != id at {W.labels[w]}")
    post("under_snake_on_module", fails)

    WX = tensor_over_A(W, X)
    fails = []
    for a in range(A.dim):
        av = {a: 1}
        diff: Vec = {}
        for (w_i, x_i) in D.coev:
            add_into(diff, WX.pure([W.act_left(av, w_i), x_i]))
            add_into(diff, WX.pure([w_i, X.act_right(x_i, av)]), -1)
        if diff:
            fails.append(f"a.coev(1) != coev(1).a for a={A.labels[a]}")
    post("coev_central", fails)

    XW = tensor_over_A(X, W)
    fails = []
    for a in range(A.dim):
        av = {a: 1}
        diff = {}
        for (y_j, r_j) in D.under_coev:
            add_into(diff, XW.pure([X.act_left(av, y_j), r_j]))
            add_into(diff, XW.pure([y_j, W.act_right(r_j, av)]), -1)
        if diff:
            fails.append(f"a.under_coev(1) != under_coev(1).a for a={A.labels[a]}")
    post("under_coev_central", fails)

    return {"ok": all(c["status"] == "PASS" for c in checks), "checks": checks}


# -- hom spaces ---------------------------------------------------------------


class HomSpace:
    """Basis of module maps M -> N with the induced A-bimodule structure.

    side "right": right-module maps, [a (x) bbar . f](m) = a f(b m).
    side "left": left-module maps, [a (x) bbar . g](m) = g(m a) b.
    """

    def __init__(self, M: FgpBimodule, N: FgpBimodule, side: str):
        if M.base is not N.base:
            raise BaseMismatch("hom between bimodules over different algebras")
        if side not in ("right", "left"):
            raise ValueError(f"side must be 'right' or 'left', got {side!r}")
        self.M, self.N, self.side = M, N, side
        A = M.base
        sys = LinearSystem()
        for a in range(A.dim):
            av = {a: 1}
            for m in range(M.dim):
                if side == "right":
                    src = M.act_right({m: 1}, av)   # f(m a) = f(m) a
                else:
                    src = M.act_left(av, {m: 1})    # f(a m) = a f(m)
                for n in range(N.dim):
                    coeffs: Vec = {}
                    for m2, c in src.items():
                        add_into(coeffs, {(m2, n): 1}, c)
                    # subtract sum_n2 F[m][n2] * act[n2 -> n]
                    for n2 in range(N.dim):
                        img2 = (N.act_right({n2: 1}, av) if side == "right"
                                else N.act_left(av, {n2: 1}))
                        c2 = img2.get(n, 0)
                        if c2:
                            add_into(coeffs, {(m, n2): 1}, -c2)
                    if coeffs:
                        sys.add_equation(coeffs)
        _, null = sys.solve()
        self.basis = []
        for vecmap in null:
            cols = [dict() for _ in range(M.dim)]
            for (m, n), c in vecmap.items():
                cols[m][n] = c
            self.basis.append(cols)
        self.dim = len(self.basis)
        self._coords = Eliminator(track=True)
        for k, cols in enumerate(self.basis):
            flat = {(m, n): c for m in range(M.dim) for n, c in cols[m].items()}
            self._coords.insert(flat, tag=k)

    def apply(self, k: int, m: Vec) -> Vec:
        out: Vec = {}
        for mi, mc in m.items():
            add_into(out, self.basis[k][mi], mc)
        return out

    def coords(self, cols) -> Optional[Vec]:
        """Coordinates of a map (cols over M basis) in the computed basis."""
        flat = {(m, n): c for m in range(self.M.dim) for n, c in cols[m].items()}
        return self._coords.membership(flat)

    def act(self, a: Vec, b: Vec, k: int):
        """Image of [a (x) bbar] on basis map k, as cols."""
        M, N = self.M, self.N
        cols = []
        for m in range(M.dim):
            if self.side == "right":
                v = self.apply(k, M.act_left(b, {m: 1}))
                cols.append(N.act_left(a, v))
            else:
                v = self.apply(k, M.act_right({m: 1}, a))
                cols.append(N.act_right(v, b))
        return cols

    def as_bimodule(self, name: str = "") -> FgpBimodule:
        A = self.M.base
        left, right = [], []
        for a in range(A.dim):
            av = {a: 1}
            col = []
            for k in range(self.dim):
                co = self.coords(self.act(av, A.unit, k))
                if co is None:
                    raise BimoduleError("hom space not closed under left action")
                col.append(co)
            left.append(col)
        for k in range(self.dim):
            row = []
            for a in range(A.dim):
                co = self.coords(self.act(A.unit, {a: 1}, k))
                if co is None:
                    raise BimoduleError("hom space not closed under right action")
                row.append(co)
            right.append(row)
        nm = name or f"Hom_{self.side}({self.M.name},{self.N.name})"
        labels = [f"h{k}" for k in range(self.dim)]
        return FgpBimodule(A, labels, left, right, name=nm)


def hom_space(M: FgpBimodule, N: FgpBimodule, side: str = "right") -> HomSpace:
    return HomSpace(M, N, side)


# -- quotients and free bimodules ---------------------------------------------


def quotient_bimodule(M: FgpBimodule, rels: Sequence[Vec], name: str = ""):
    """Quotient of M by the sub-bimodule generated by rels.

    Returns (Q, proj_cols, sect_cols): proj_cols[m] expresses the image of
    basis m of M in Q's basis; sect_cols[q] is the chosen representative in M.
    The relation span is saturated under both actions, so the quotient is
    always a bimodule.
    """
    A = M.base
    span = Eliminator(sort_key=RevKey)
    queue = [dict(r) for r in rels if r]
    while queue:
        v = queue.pop()
        if span.insert(v) is None:
            continue
        for a in range(A.dim):
            queue.append(M.act_left({a: 1}, v))
            queue.append(M.act_right(v, {a: 1}))
    pivots = span.pivots()
    rep = [m for m in range(M.dim) if m not in pivots]
    rep_index = {m: q for q, m in enumerate(rep)}

    def project(v: Vec) -> Vec:
        res, _ = span.reduce(v)
        return {rep_index[m]: c for m, c in res.items()}

    labels = [M.labels[m] for m in rep]
    left = [[project(M.act_left({a: 1}, {m: 1})) for m in rep] for a in range(A.dim)]
    right = [[project(M.act_right({m: 1}, {a: 1})) for a in range(A.dim)] for m in rep]
    Q = FgpBimodule(A, labels, left, right, name=name or M.name + "/~")
    proj_cols = [project({m: 1}) for m in range(M.dim)]
    sect_cols = [{m: Fraction(1)} for m in rep]
    return Q, proj_cols, sect_cols


def free_bimodule(A: FiniteAlgebra, gens: Sequence[str], name: str = "") -> FgpBimodule:
    """Central free bimodule: basis gens x A-basis, a.(g,b) = (g,ab),
    (g,b).a = (g,ba)."""
    n = len(gens)
    labels = [f"{g}.{A.labels[b]}" for g in gens for b in range(A.dim)]
    dim = n * A.dim
    left = [[{} for _ in range(dim)] for _ in range(A.dim)]
    right = [[{} for _ in range(A.dim)] for _ in range(dim)]
    for g in range(n):
        for b in range(A.dim):
            m = g * A.dim + b
            for a in range(A.dim):
                left[a][m] = {g * A.dim + k: c for k, c in A.c[a][b].items()}
                right[m][a] = {g * A.dim + k: c for k, c in A.c[b][a].items()}
    return FgpBimodule(A, labels, left, right, name=name or f"A^{n}")


def free_bimodule_duality(A: FiniteAlgebra, gens: Sequence[str],
                          dual_gens: Optional[Sequence[str]] = None,
                          name: str = "") -> DualityData:
    """Two-sided self-dual structure on a central free bimodule.

    ev(f_i a (x) e_j b) = delta_ij a b, coev(1) = sum e_i (x) f_i, and the
    underlined pair mirrors it; the same dual object serves both sides, which
    is the pivotal structure.
    """
    n = len(gens)
    W = free_bimodule(A, gens, name=name or "Omega")
    X = free_bimodule(A, list(dual_gens or [f"f_{g}" for g in gens]),
                      name=(name or "Omega") + "^")
    ev = [[{} for _ in range(W.dim)] for _ in range(X.dim)]
    under_ev = [[{} for _ in range(X.dim)] for _ in range(W.dim)]
    for i in range(n):
        for j in range(n):
            for a in range(A.dim):
                for b in range(A.dim):
                    if i == j:
                        ev[i * A.dim + a][j * A.dim + b] = dict(A.c[a][b])
                        under_ev[i * A.dim + a][j * A.dim + b] = dict(A.c[a][b])
    unit_keys = list(A.unit.items())
    coev = []
    under_coev = []
    for g in range(n):
        wv: Vec = {}
        xv: Vec = {}
        for k, c in unit_keys:
            wv[g * A.dim + k] = c
            xv[g * A.dim + k] = c
        coev.append((wv, dict(xv)))
        under_coev.append((dict(xv), dict(wv)))
    return DualityData(W, X, coev, ev, under_coev, under_ev)
