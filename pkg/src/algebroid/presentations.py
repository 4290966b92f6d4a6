"""Presentations of the tower algebras: relations, rewriting, membership.

A Presentation owns the alphabet, the relation list (each FreeElem read as
= 0, normalised so the graded-lex leading word has coefficient 1), and for
the PBW-like levels an oriented rule list.  Equality of elements is decided
two ways: normal forms where rules exist, and a degree-truncated
ideal-membership span everywhere.  Membership is sound; Unknown is not a
disproof.  The span is built outward from the query: starting from its
words, every occurrence of a relation word as a subword contributes the
surrounding product u.r.v (kept when no word exceeds the bound), and newly
seen words are explored in turn.  Certificates list (u, relation index, v,
coefficient) and are re-verified by exact recombination before a Member is
returned.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Optional, Sequence

from .freealg import (ONE, RANK_A, RANK_ABAR, fe_mul_word, gl_key, max_len,
                      pretty)
from .linalg import Eliminator, Vec, add_into

LEVELS = ("TX", "BOmega", "BX", "IBOmega", "IBX", "HOmega", "HX", "DX")
RULE_LEVELS = ("TX", "BOmega", "BX")
TENSOR_KINDS = ("coring", "diamond", "odot", "aop")


class NoRulesAtThisLevel(RuntimeError):
    pass


class BoundTooSmall(ValueError):
    pass


class PresentationError(ValueError):
    pass


class MembershipResult:
    __slots__ = ("status", "certificate", "bound")

    def __init__(self, status: str, certificate, bound: int):
        self.status = status
        self.certificate = certificate
        self.bound = bound

    def __bool__(self):
        return self.status == "Member"

    def __repr__(self):
        n = len(self.certificate) if self.certificate is not None else 0
        return f"<{self.status} (bound {self.bound}, {n} certificate terms)>"


class Rule:
    """Oriented rule lhs -> rhs, derived from relations[rel_index]."""

    __slots__ = ("lhs", "rhs", "rel_index")

    def __init__(self, lhs, rhs, rel_index):
        self.lhs = tuple(lhs)
        self.rhs = {w: c for w, c in rhs.items() if c}
        self.rel_index = rel_index


def normalize_relation(rel):
    rel = {w: c for w, c in rel.items() if c}
    if not rel:
        return None
    lead = max(rel, key=gl_key)
    c = rel[lead]
    if c == 1:
        return dict(rel)
    inv = Fraction(1, c) if isinstance(c, int) else 1 / c
    return {w: x * inv for w, x in rel.items()}


class Presentation:
    def __init__(self, level: str, alphabet, relations, rules=None,
                 dim_a: int = 0, names=None, name: str = ""):
        if level not in LEVELS:
            raise PresentationError(f"unknown level {level!r}")
        self.level = level
        self.alphabet = frozenset(alphabet)
        self.relations = []
        for rel in relations:
            nr = normalize_relation(rel)
            if nr is None:
                continue
            for w in nr:
                for s in w:
                    if s not in self.alphabet:
                        raise PresentationError(
                            f"relation uses symbol {s} outside the alphabet")
            self.relations.append(nr)
        self.rules = list(rules) if rules else None
        self.dim_a = dim_a
        self.names = names
        self.name = name or level
        self._nf: dict = {}
        self._rel_maxlen = [max_len(r) for r in self.relations]
        self._rel_index = {}
        for ridx, rel in enumerate(self.relations):
            for rw in rel:
                if not rw:
                    continue
                self._rel_index.setdefault(rw[0], []).append((ridx, rw))
        if self.rules:
            for rule in self.rules:
                lk = gl_key(rule.lhs)
                for w in rule.rhs:
                    if not gl_key(w) < lk:
                        raise PresentationError(
                            f"rule at relation {rule.rel_index} not decreasing")
                want = dict(rule.rhs)
                want = {w: -c for w, c in want.items()}
                add_into(want, {rule.lhs: Fraction(1)})
                if want != self.relations[rule.rel_index]:
                    raise PresentationError(
                        f"rule not derived from relation {rule.rel_index}")

    # -- rewriting -------------------------------------------------------------

    def _match(self, word):
        for pos in range(len(word)):
            for rule in self.rules:
                L = len(rule.lhs)
                if word[pos:pos + L] == rule.lhs:
                    return pos, rule
        return None

    def nf_word(self, w) -> Vec:
        cached = self._nf.get(w)
        if cached is not None:
            return cached
        m = self._match(w)
        if m is None:
            res = {w: Fraction(1)}
        else:
            pos, rule = m
            u, v = w[:pos], w[pos + len(rule.lhs):]
            res = {}
            for w2, c in fe_mul_word(u, rule.rhs, v).items():
                add_into(res, self.nf_word(w2), c)
        self._nf[w] = res
        return res

    def normal_form(self, e) -> Vec:
        if not self.rules:
            raise NoRulesAtThisLevel(
                f"{self.level} has no oriented rules; use ideal_membership")
        out: Vec = {}
        for w, c in e.items():
            add_into(out, self.nf_word(w), c)
        return out

    def reduce_traced(self, e):
        """Reduce with an explicit certificate: e = result + sum c.u.rel.v."""
        if not self.rules:
            raise NoRulesAtThisLevel(self.level)
        pending = {w: c for w, c in e.items() if c}
        out: Vec = {}
        steps = []
        while pending:
            w = max(pending, key=gl_key)
            c = pending.pop(w)
            m = self._match(w)
            if m is None:
                add_into(out, {w: 1}, c)
                continue
            pos, rule = m
            u, v = w[:pos], w[pos + len(rule.lhs):]
            steps.append((u, rule.rel_index, v, c))
            add_into(pending, fe_mul_word(u, rule.rhs, v), c)
        return out, steps

    # -- membership ------------------------------------------------------------

    def _verify_certificate(self, e, cert):
        acc: Vec = {}
        for (u, ridx, v, c) in cert:
            add_into(acc, fe_mul_word(u, self.relations[ridx], v), c)
        add_into(acc, e, -1)
        if acc:
            raise PresentationError("certificate does not recombine to the query")

    def ideal_membership(self, e, bound: Optional[int] = None,
                         max_gens: Optional[int] = None,
                         check_every: int = 256) -> MembershipResult:
        e = {w: c for w, c in e.items() if c}
        D = bound if bound is not None else max_len(e) + 2
        if not e:
            return MembershipResult("Member", [], D)
        if max_len(e) > D:
            raise BoundTooSmall(f"query has words longer than bound {D}")
        if self.rules:
            nf, steps = self.reduce_traced(e)
            if not nf:
                self._verify_certificate(e, steps)
                return MembershipResult("Member", steps, D)

        def finish(elim, payload):
            combo = elim.membership(e)
            if combo is None:
                return None
            cert = []
            for tag, c in sorted(combo.items()):
                u, ridx, v = payload[tag]
                cert.append((u, ridx, v, c))
            self._verify_certificate(e, cert)
            return MembershipResult("Member", cert, D)

        elim = Eliminator(track=True)
        payload = {}
        seen = set()
        active = set()
        queue = deque(sorted(e, key=gl_key))
        since_check = 0
        while queue:
            w = queue.popleft()
            if w in active:
                continue
            active.add(w)
            for pos in range(len(w)):
                for (ridx, rw) in self._rel_index.get(w[pos], ()):
                    L = len(rw)
                    if w[pos:pos + L] != rw:
                        continue
                    u, v = w[:pos], w[pos + L:]
                    if len(u) + self._rel_maxlen[ridx] + len(v) > D:
                        continue
                    key = (u, ridx, v)
                    if key in seen:
                        continue
                    seen.add(key)
                    gen = fe_mul_word(u, self.relations[ridx], v)
                    tag = len(payload)
                    payload[tag] = key
                    elim.insert(gen, tag=tag)
                    since_check += 1
                    if max_gens is not None and len(payload) > max_gens:
                        return (finish(elim, payload)
                                or MembershipResult("Unknown", None, D))
                    for gw in gen:
                        if gw not in active:
                            queue.append(gw)
            if since_check >= check_every:
                since_check = 0
                found = finish(elim, payload)
                if found is not None:
                    return found
        return finish(elim, payload) or MembershipResult("Unknown", None, D)

    def equal_mod_ideal(self, a, b, bound: Optional[int] = None
                        ) -> MembershipResult:
        diff = dict(a)
        add_into(diff, b, -1)
        return self.ideal_membership(diff, bound=bound)

    # -- tensor quotients --------------------------------------------------------

    def _middle_gen(self, kind: str, k: int, words, j):
        """The middle-jump generator at junction j with base pair words."""
        a, abar = (RANK_A, k), (RANK_ABAR, k)
        w1, w2 = words[j], words[j + 1]
        if kind in ("coring", "diamond"):
            left = words[:j] + ((abar,) + w1, w2) + words[j + 2:]
        elif kind == "odot":
            left = words[:j] + (w1 + (a,), w2) + words[j + 2:]
        elif kind == "aop":
            left = words[:j] + (w1 + (abar,), w2) + words[j + 2:]
        else:
            raise PresentationError(f"unknown tensor kind {kind!r}")
        sym = a if kind in ("coring", "diamond", "odot") else abar
        right = words[:j] + (w1, (sym,) + w2) + words[j + 2:]
        return {left: Fraction(1), right: Fraction(-1)}

    def tensor_membership(self, e, kinds, bound: Optional[int] = None
                          ) -> MembershipResult:
        """Membership in the kernel span of a middle-identified tensor power.

        e maps tuples of words (one per factor) to scalars; kinds names the
        identification at each junction.  Generators are relation products in
        a single factor and the middle-jump family at each junction, with
        every factor truncated at the bound.
        """
        if isinstance(kinds, str):
            kinds = (kinds,)
        for kind in kinds:
            if kind not in TENSOR_KINDS:
                raise PresentationError(f"unknown tensor kind {kind!r}")
        e = {tuple(key): c for key, c in e.items() if c}
        nf = len(kinds) + 1
        longest = max((len(w) for key in e for w in key), default=0)
        D = bound if bound is not None else longest + 2
        if longest > D:
            raise BoundTooSmall(f"query has factor words longer than bound {D}")
        elim = Eliminator(track=True)
        payload = {}
        seen = set()
        active = set()
        queue = list(e)
        while queue:
            key = queue.pop()
            if key in active:
                continue
            active.add(key)
            fresh = []
            for f in range(nf):
                w = key[f]
                for pos in range(len(w)):
                    for (ridx, rw) in self._rel_index.get(w[pos], ()):
                        L = len(rw)
                        if w[pos:pos + L] != rw:
                            continue
                        u, v = w[:pos], w[pos + L:]
                        if len(u) + self._rel_maxlen[ridx] + len(v) > D:
                            continue
                        gkey = ("rel", f, u, ridx, v, key[:f], key[f + 1:])
                        if gkey in seen:
                            continue
                        seen.add(gkey)
                        gen = {}
                        for w2, c in fe_mul_word(u, self.relations[ridx],
                                                 v).items():
                            gen[key[:f] + (w2,) + key[f + 1:]] = c
                        fresh.append((gkey, gen))
            for j, kind in enumerate(kinds):
                w1, w2 = key[j], key[j + 1]
                heads = []
                if kind in ("coring", "diamond"):
                    if w1 and w1[0][0] == RANK_ABAR:
                        heads.append((w1[0][1], key[:j] + (w1[1:], w2)
                                      + key[j + 2:]))
                elif kind == "odot":
                    if w1 and w1[-1][0] == RANK_A:
                        heads.append((w1[-1][1], key[:j] + (w1[:-1], w2)
                                      + key[j + 2:]))
                elif kind == "aop":
                    if w1 and w1[-1][0] == RANK_ABAR:
                        heads.append((w1[-1][1], key[:j] + (w1[:-1], w2)
                                      + key[j + 2:]))
                jump_sym = RANK_A if kind != "aop" else RANK_ABAR
                if w2 and w2[0][0] == jump_sym:
                    heads.append((w2[0][1], key[:j] + (w1, w2[1:])
                                  + key[j + 2:]))
                for (k, base) in heads:
                    if len(base[j]) + 1 > D or len(base[j + 1]) + 1 > D:
                        continue
                    gkey = ("mid", j, kind, k, base)
                    if gkey in seen:
                        continue
                    seen.add(gkey)
                    fresh.append((gkey, self._middle_gen(kind, k, base, j)))
            for gkey, gen in fresh:
                tag = len(payload)
                payload[tag] = gkey
                elim.insert(gen, tag=tag)
                for gk in gen:
                    if gk not in active:
                        queue.append(gk)
        combo = elim.membership(e)
        if combo is None:
            return MembershipResult("Unknown", None, D)
        cert = []
        acc: Vec = {}
        for tag, c in sorted(combo.items()):
            gkey = payload[tag]
            cert.append((gkey, c))
            if gkey[0] == "rel":
                _, f, u, ridx, v, before, after = gkey
                for w2, cw in fe_mul_word(u, self.relations[ridx], v).items():
                    add_into(acc, {before + (w2,) + after: cw}, c)
            else:
                _, j, kind, k, base = gkey
                add_into(acc, self._middle_gen(kind, k, base, j), c)
        add_into(acc, e, -1)
        if acc:
            raise PresentationError("tensor certificate does not recombine")
        return MembershipResult("Member", cert, D)

    def show(self, e) -> str:
        return pretty(e, self.names)

    def __repr__(self):
        nr = len(self.rules) if self.rules else 0
        return (f"<Presentation {self.name}: level {self.level}, "
                f"{len(self.relations)} relations, {nr} rules>")
