"""Worked example calculi, addressable as name.kind (e.g. "gamma2.quiver").

gamma2   -- 2-cycle quiver on {p,q}; surjective, Omega^2 = 0.
point    -- single vertex, no edges; the degenerate calculus.
triangle -- complete loop-free quiver on 3 vertices; dim Omega^2 = 3.
m2       -- inner calculus on M_2 with Omega^1 free on two central
            generators s,t and theta = E12.s + E21.t.
d6       -- cocycle calculus on the dihedral group of order 12 acting on the
            plane by 60-degree rotations and a reflection, theta = xi + tau.
"""

from __future__ import annotations

from fractions import Fraction

from .algebras import new_matrix_algebra
from .bimodules import free_bimodule_duality
from .calculi import (Calculus1, Calculus2, CalculusError, _mat_mul,
                      build_exterior_square_omega2, build_group_cocycle_calculus,
                      build_inner_calculus, build_quiver_calculus,
                      build_quiver_omega2)
from .linalg import add_into
from .scalars import Quad


def gamma2() -> Calculus1:
    return build_quiver_calculus(
        ["p", "q"], [("u", "p", "q"), ("w", "q", "p")], name="gamma2")


def point() -> Calculus1:
    return build_quiver_calculus(["p"], [], name="point")


def triangle() -> Calculus1:
    verts = ["0", "1", "2"]
    edges = [(f"e{s}{t}", s, t) for s in verts for t in verts if s != t]
    return build_quiver_calculus(verts, edges, name="triangle")


def m2() -> Calculus1:
    A = new_matrix_algebra(2)
    D = free_bimodule_duality(A, ["s", "t"], ["f_s", "f_t"])
    theta = D.module.elem("s.E12")
    theta.update(D.module.elem("t.E21"))
    return build_inner_calculus(A, D, theta, name="m2")


def _d6_data():
    half = Fraction(1, 2)
    rot = [[Quad(half, 0, 3), Quad(0, -half, 3)],
           [Quad(0, half, 3), Quad(half, 0, 3)]]
    flip = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(-1)]]
    eye = [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]

    def label(k, eps):
        base = "e" if k == 0 else ("a" if k == 1 else f"a{k}")
        if not eps:
            return base
        return "b" if k == 0 else base + "b"

    elements = [label(k, e) for e in (0, 1) for k in range(6)]
    idx = {}
    for e in (0, 1):
        for k in range(6):
            idx[(k, e)] = label(k, e)

    def mul(x, y):
        (k, e), (m, d) = x, y
        if e == 0:
            return ((k + m) % 6, d)
        return ((k - m) % 6, 1 - d)

    keys = [(k, e) for e in (0, 1) for k in range(6)]
    key_of = {idx[k]: k for k in keys}
    table = [[idx[mul(key_of[g], key_of[h])] for h in elements] for g in elements]

    rep = {}
    for (k, e) in keys:
        mat = eye
        for _ in range(k):
            mat = _mat_mul(mat, rot)
        if e:
            mat = _mat_mul(mat, flip)
        rep[idx[(k, e)]] = mat

    theta = [Fraction(1), Fraction(1)]
    zeta = {}
    for g in elements:
        mg = rep[g]
        zeta[g] = [mg[r][0] * theta[0] + mg[r][1] * theta[1] - theta[r]
                   for r in range(2)]
    return elements, table, rep, zeta


def d6() -> Calculus1:
    elements, table, rep, zeta = _d6_data()
    return build_group_cocycle_calculus(
        elements, table, rep, zeta, lam_labels=["xi", "tau"], name="d6")


CATALOG = {
    "gamma2": ("quiver", gamma2),
    "point": ("quiver", point),
    "triangle": ("quiver", triangle),
    "m2": ("inner", m2),
    "d6": ("group", d6),
}


def load(name: str) -> Calculus1:
    """Resolve "name" or "name.kind" against the catalog."""
    base, _, kind = name.partition(".")
    if base not in CATALOG:
        raise KeyError(f"unknown calculus {name!r}; have "
                       f"{sorted(CATALOG)}")
    want, builder = CATALOG[base]
    if kind and kind != want:
        raise KeyError(f"{base} is a {want} calculus, not {kind}")
    return builder()


def second_order(calc: Calculus1) -> Calculus2:
    """The documented Omega^2 for a catalog calculus, if one exists."""
    if calc.kind == "quiver":
        return build_quiver_omega2(calc)
    if calc.kind == "group":
        return build_exterior_square_omega2(calc)
    raise CalculusError(f"no second-order extension documented for {calc.name}")


def documented_twist(calc: Calculus1):
    """The antipode twist each calculus family carries by construction.

    Quiver calculi send a reversed arrow to the difference of its endpoint
    vertex functions.  The free-bimodule families (inner and group) use the
    twist that vanishes on the free dual basis: decompose x with left
    coefficients against the coevaluation legs, x = sum_i ev(x (x) w_i) x_i,
    and set Upsilon(x) = sum_i under_ev(d ev(x (x) w_i) (x) x_i).  Returned
    as one base-algebra vector per dual-basis element.
    """
    if calc.kind == "quiver":
        q = calc.quiver
        vidx = q["vidx"]
        out = []
        for (_lab, s, t) in q["edges"]:
            vec = {}
            vec[vidx[s]] = vec.get(vidx[s], 0) + Fraction(1)
            vec[vidx[t]] = vec.get(vidx[t], 0) - Fraction(1)
            out.append({k: c for k, c in vec.items() if c})
        return out
    out = []
    for b in range(calc.dual.dim):
        acc = {}
        for (w_i, x_i) in calc.coev:
            add_into(acc, calc.under_ev(calc.d(calc.ev({b: 1}, w_i)), x_i))
        out.append({k: c for k, c in acc.items() if c})
    return out
