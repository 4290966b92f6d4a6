"""Free associative algebra over a graded generator alphabet.

A generator symbol is a tuple (rank, index...) with ranks ordered
A < Abar < X < XO < OX < X2O2 < O2X2; a word is a tuple of symbols and an
element a sparse dict word -> scalar.  The graded lexicographic key is
(length, word), which tuple comparison implements directly since symbols are
tuples themselves (rank first, then indices).
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Vec, add_into

RANK_A, RANK_ABAR, RANK_X, RANK_XO, RANK_OX, RANK_X2O2, RANK_O2X2 = range(7)
RANK_NAMES = ("A", "Abar", "X", "XO", "OX", "X2O2", "O2X2")

ONE = ()


def sym_a(i):
    return (RANK_A, i)


def sym_abar(i):
    return (RANK_ABAR, i)


def sym_x(i):
    return (RANK_X, i)


def sym_xo(i, j):
    return (RANK_XO, i, j)


def sym_ox(i, j):
    return (RANK_OX, i, j)


def sym_x2o2(i, j):
    return (RANK_X2O2, i, j)


def sym_o2x2(i, j):
    return (RANK_O2X2, i, j)


def gl_key(word):
    return (len(word), word)


def fe(word, c=1):
    """Single-word element."""
    return {tuple(word): Fraction(c) if isinstance(c, int) else c}


def fe_add(dst, src, c=1):
    add_into(dst, src, c)
    return dst


def fe_scale(e, c):
    if not c:
        return {}
    return {w: x * c for w, x in e.items()}


def fe_sub(e1, e2):
    out = dict(e1)
    add_into(out, e2, -1)
    return out


def fe_mul(e1, e2):
    out: Vec = {}
    for w1, c1 in e1.items():
        for w2, c2 in e2.items():
            add_into(out, {w1 + w2: 1}, c1 * c2)
    return out


def fe_mul_word(u, e, v):
    """u . e . v for plain words u, v."""
    out: Vec = {}
    for w, c in e.items():
        key = u + w + v
        add_into(out, {key: 1}, c)
    return out


def fe_sum(elems):
    out: Vec = {}
    for e in elems:
        add_into(out, e)
    return out


def from_vec(vec: Vec, maker):
    """Lift a module vector to a sum of single-symbol words via maker(i)."""
    return {(maker(i),): c for i, c in vec.items()}


def max_len(e) -> int:
    return max((len(w) for w in e), default=0)


def support_symbols(e):
    out = set()
    for w in e:
        out.update(w)
    return out


def sym_name(sym, names=None) -> str:
    """Render a symbol; names maps rank -> per-index label list(s)."""
    rank = sym[0]
    if names and rank in names:
        lab = names[rank]
        try:
            if rank in (RANK_A, RANK_ABAR, RANK_X):
                return lab(sym[1]) if callable(lab) else lab[sym[1]]
            return lab(sym[1], sym[2]) if callable(lab) else lab[sym[1]][sym[2]]
        except (IndexError, KeyError):
            pass
    return f"{RANK_NAMES[rank]}({','.join(str(i) for i in sym[1:])})"


def word_name(word, names=None) -> str:
    if not word:
        return "1"
    return ".".join(sym_name(s, names) for s in word)


def pretty(e, names=None) -> str:
    from .scalars import format_scalar
    if not e:
        return "0"
    parts = []
    for w in sorted(e, key=gl_key):
        c = format_scalar(e[w])
        wn = word_name(w, names)
        if c == "1":
            parts.append(wn)
        elif c == "-1":
            parts.append(f"-{wn}")
        else:
            parts.append(f"({c})*{wn}")
    return " + ".join(parts)
