"""Degree-capped Buchberger-Mora completion in the free algebra.

Words are ordered degree-lexicographically, variables ranked by a declared
order (later variables are larger).  Completion keeps, for every rule it
creates, a derivation from the input relations so that any ideal-membership
claim comes with an explicit combination ``sum c * l * r_i * r`` that can be
replayed in exact arithmetic.  A truncated completion can prove membership
but never refute it; failures are reported as :class:`Inconclusive`.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .bcs import Bcs, BcsError, find_satisfying, to_polynomial_relations
from .ncpoly import Coeff, NcPoly, Word, format_coeff, parse_coeff

DEFAULT_DEGREE = 8
EXTENDIBILITY_LIMIT = 1 << 24

IntWord = Tuple[int, ...]
# derivation entry: coefficient, left word, reference, right word.
# reference >= 0 is a rule id, reference < 0 is input relation -(ref + 1).
Step = Tuple[Coeff, IntWord, int, IntWord]


def involution(p: NcPoly) -> NcPoly:
    return p.involution()


Combination = Tuple[Tuple[Word, int, Word, Coeff], ...]


def _replay(combination: Combination, basis: Sequence[NcPoly]) -> NcPoly:
    acc: Dict[Word, Coeff] = {}
    for l, idx, r, c in combination:
        for w, cw in basis[idx].items():
            key = l + w + r
            s = acc.get(key, 0) + c * cw
            if s == 0:
                acc.pop(key, None)
            else:
                acc[key] = s
    return NcPoly(acc)


@dataclass(frozen=True)
class ProofTrace:
    """``target == sum(coeff * l * basis[idx] * r)`` over ``combination``.

    The basis is the input ``relations`` followed by the polynomials of
    ``lemmas``.  Lemma ``j`` is itself a pair ``(polynomial, combination)``
    whose combination may only use the inputs and lemmas ``0..j-1``, so
    checking lemmas in order and then the target is a complete proof of
    ideal membership.  :meth:`flatten` expands everything down to the inputs.
    """

    target: NcPoly
    relations: Tuple[NcPoly, ...]
    combination: Combination
    lemmas: Tuple[Tuple[NcPoly, Combination], ...] = ()

    @property
    def basis(self) -> List[NcPoly]:
        return list(self.relations) + [p for p, _ in self.lemmas]

    def replay(self) -> NcPoly:
        return _replay(self.combination, self.basis)

    def verify(self) -> bool:
        n = len(self.relations)
        basis = self.basis
        for j, (poly, combo) in enumerate(self.lemmas):
            if any(idx >= n + j or idx < 0 for _, idx, _, _ in combo):
                return False
            if _replay(combo, basis) != poly:
                return False
        if any(idx >= len(basis) or idx < 0 for _, idx, _, _ in self.combination):
            return False
        return self.replay() == self.target

    def flatten(self) -> "ProofTrace":
        """Equivalent trace whose combination references input relations only."""
        n = len(self.relations)
        expanded: List[Dict[Tuple[Word, int, Word], Coeff]] = []

        def expand(combo):
            acc: Dict[Tuple[Word, int, Word], Coeff] = {}
            for l, idx, r, c in combo:
                src = {((), idx, ()): Fraction(1)} if idx < n else expanded[idx - n]
                for (l2, i2, r2), c2 in src.items():
                    key = (l + l2, i2, r2 + r)
                    s = acc.get(key, 0) + c * c2
                    if s == 0:
                        acc.pop(key, None)
                    else:
                        acc[key] = s
            return acc

        for _, combo in self.lemmas:
            expanded.append(expand(combo))
        flat = expand(self.combination)
        combo = tuple((l, i, r, c) for (l, i, r), c in sorted(flat.items(), key=lambda kv: (kv[0][1], kv[0][0], kv[0][2])))
        return ProofTrace(self.target, self.relations, combo)

    def to_json(self, include_lemmas: bool = True) -> dict:
        out = {"target": self.target.to_text(), "combination": _combo_json(self.combination)}
        if include_lemmas:
            out["lemmas"] = [{"poly": p.to_text(), "combination": _combo_json(c)} for p, c in self.lemmas]
        return out

    @classmethod
    def from_json(cls, data: dict, relations: Sequence[NcPoly], lemmas=None) -> "ProofTrace":
        if lemmas is None:
            lemmas = tuple((NcPoly.from_text(d["poly"]), _combo_from_json(d["combination"])) for d in data.get("lemmas", ()))
        return cls(NcPoly.from_text(data["target"]), tuple(relations), _combo_from_json(data["combination"]), tuple(lemmas))


def _combo_json(combo: Combination) -> list:
    return [[".".join(l), idx, ".".join(r), format_coeff(c)] for l, idx, r, c in combo]


def _combo_from_json(items) -> Combination:
    def word(s):
        return tuple(s.split(".")) if s else ()

    return tuple((word(l), int(i), word(r), parse_coeff(c)) for l, i, r, c in items)


@dataclass(frozen=True)
class Inconclusive:
    """Completion at this degree cap could not reduce the target to zero."""

    degree: int
    target: NcPoly
    residue: NcPoly

    def __bool__(self):
        return False


class RewriteSystem:
    """Oriented rules ``lead -> lead - g`` with derivations back to the inputs.

    Built by :func:`complete`; afterwards it is only read, so normal forms on
    distinct inputs may be computed concurrently.
    """

    def __init__(self, order: Sequence[str], degree_bound: int, relations: Sequence[NcPoly] = ()):
        self.order: Tuple[str, ...] = tuple(order)
        self.rank: Dict[str, int] = {v: i for i, v in enumerate(self.order)}
        self.degree_bound = degree_bound
        self.relations: Tuple[NcPoly, ...] = tuple(relations)
        self._lead: Dict[IntWord, int] = {}
        self._by_len: Dict[int, Dict[IntWord, int]] = {}
        self._tails: List[List[Tuple[IntWord, Coeff]]] = []
        self._leads: List[IntWord] = []
        self._derivs: List[List[Step]] = []
        self._names: List[str] = list(self.order)
        self.stats = {"overlaps": 0, "reductions_to_zero": 0, "discarded": 0}

    # -- conversion ------------------------------------------------------

    def _to_int(self, p: NcPoly) -> Dict[IntWord, Coeff]:
        rank = self.rank
        out = {}
        for w, c in p.items():
            iw = []
            for v in w:
                r = rank.get(v)
                if r is None:
                    # undeclared names rank above every declared one, in order of appearance
                    r = rank[v] = len(rank)
                    self._names.append(v)
                iw.append(r)
            out[tuple(iw)] = c
        return out

    def _name(self, r: int) -> str:
        return self._names[r]

    def _to_word(self, w: IntWord) -> Word:
        return tuple(self._name(r) for r in w)

    def _to_poly(self, d: Mapping[IntWord, Coeff]) -> NcPoly:
        return NcPoly({self._to_word(w): c for w, c in d.items()})

    # -- rules -----------------------------------------------------------

    @property
    def rules(self) -> List[Tuple[Word, NcPoly]]:
        """Active rules as ``(leading word, replacement)``; leading coefficient is 1."""
        out = []
        for lead, rid in sorted(self._lead.items(), key=lambda kv: (len(kv[0]), kv[0])):
            rem = {w: -c for w, c in self._tails[rid]}
            out.append((self._to_word(lead), self._to_poly(rem)))
        return out

    def rule_polynomial(self, rid: int) -> NcPoly:
        d = {self._leads[rid]: Fraction(1)}
        d.update(self._tails[rid])
        return self._to_poly(d)

    def rule_ids(self) -> List[int]:
        return sorted(self._lead.values())

    def _find(self, w: IntWord):
        n = len(w)
        for i in range(n):
            for L, table in self._by_len.items():
                if i + L <= n:
                    rid = table.get(w[i:i + L])
                    if rid is not None:
                        return i, L, rid
        return None

    def _reduce(self, poly: Dict[IntWord, Coeff]) -> Tuple[Dict[IntWord, Coeff], List[Step]]:
        work = dict(poly)
        heap = [(-len(w), tuple(-a for a in w), w) for w in work]
        heapq.heapify(heap)
        result: Dict[IntWord, Coeff] = {}
        steps: List[Step] = []
        while heap:
            _, _, w = heapq.heappop(heap)
            c = work.pop(w, None)
            if c is None:
                continue
            hit = self._find(w)
            if hit is None:
                result[w] = c
                continue
            i, L, rid = hit
            l, r = w[:i], w[i + L:]
            steps.append((c, l, rid, r))
            for m, cm in self._tails[rid]:
                key = l + m + r
                old = work.get(key)
                if old is None:
                    work[key] = -c * cm
                    heapq.heappush(heap, (-len(key), tuple(-a for a in key), key))
                else:
                    s = old - c * cm
                    if s == 0:
                        del work[key]
                    else:
                        work[key] = s
        return result, steps

    def normal_form(self, p: NcPoly) -> NcPoly:
        nf, _ = self._reduce(self._to_int(p))
        return self._to_poly(nf)

    def _add_rule(self, nf: Dict[IntWord, Coeff], deriv: List[Step]) -> int:
        lead = max(nf, key=lambda w: (len(w), w))
        lc = nf[lead]
        inv = 1 / lc
        rid = len(self._leads)
        self._leads.append(lead)
        self._tails.append(sorted(((w, c * inv) for w, c in nf.items() if w != lead), key=lambda t: (len(t[0]), t[0]), reverse=True))
        self._derivs.append([(c * inv, l, ref, r) for c, l, ref, r in deriv])
        self._lead[lead] = rid
        self._by_len.setdefault(len(lead), {})[lead] = rid
        return rid

    def _deactivate(self, rid: int):
        lead = self._leads[rid]
        del self._lead[lead]
        table = self._by_len[len(lead)]
        del table[lead]
        if not table:
            del self._by_len[len(lead)]

    # -- certificates ----------------------------------------------------

    def _needed(self, steps_list: Sequence[Sequence[Step]]) -> List[int]:
        need = set()
        stack = [rid for steps in steps_list for _, _, rid, _ in steps if rid >= 0]
        while stack:
            rid = stack.pop()
            if rid in need:
                continue
            need.add(rid)
            stack.extend(ref for _, _, ref, _ in self._derivs[rid] if ref >= 0)
        return sorted(need)

    def _certify(self, targets: Sequence[NcPoly], steps_list: Sequence[Sequence[Step]]) -> List[ProofTrace]:
        n = len(self.relations)
        needed = self._needed(steps_list)
        slot = {rid: n + j for j, rid in enumerate(needed)}

        def convert(entries):
            acc: Dict[Tuple[IntWord, int, IntWord], Coeff] = {}
            for c, l, ref, r in entries:
                key = (l, -ref - 1 if ref < 0 else slot[ref], r)
                s = acc.get(key, 0) + c
                if s == 0:
                    acc.pop(key, None)
                else:
                    acc[key] = s
            return tuple((self._to_word(l), i, self._to_word(r), c) for (l, i, r), c in acc.items())

        lemmas = tuple((self.rule_polynomial(rid), convert(self._derivs[rid])) for rid in needed)
        return [ProofTrace(t, self.relations, convert(steps), lemmas) for t, steps in zip(targets, steps_list)]

    def trace_of_rule(self, rid: int) -> ProofTrace:
        """Certificate that rule ``rid``'s polynomial lies in the input ideal."""
        return self._certify([self.rule_polynomial(rid)], [[(Fraction(1), (), rid, ())]])[0]

    def prove_all(self, targets: Sequence[NcPoly]) -> Union[List[ProofTrace], Inconclusive]:
        """Prove every target with one shared lemma list, or report the first failure."""
        steps_list = []
        for p in targets:
            nf, steps = self._reduce(self._to_int(p))
            if nf:
                return Inconclusive(self.degree_bound, p, self._to_poly(nf))
            steps_list.append(steps)
        return self._certify(list(targets), steps_list)

    def prove(self, p: NcPoly) -> Union[ProofTrace, Inconclusive]:
        res = self.prove_all([p])
        return res if isinstance(res, Inconclusive) else res[0]


def _overlaps(a: IntWord, b: IntWord, bound: int):
    """Proper overlaps: a = u.o and b = o.v with o, u, v non-empty."""
    la, lb = len(a), len(b)
    for k in range(min(la, lb) - 1, 0, -1):
        if la + lb - k > bound:
            break
        if a[la - k:] == b[:k]:
            yield a[:la - k], b[k:], la + lb - k


def complete(relations: Sequence[NcPoly], degree_bound: int = DEFAULT_DEGREE, order: Optional[Sequence[str]] = None) -> RewriteSystem:
    """Capped completion of ``relations`` under deglex with the given variable order."""
    relations = [p for p in relations]
    if order is None:
        seen: Dict[str, None] = {}
        for p in relations:
            for w, _ in sorted(p.items(), key=lambda wc: (len(wc[0]), wc[0])):
                for v in w:
                    seen.setdefault(v, None)
        order = list(seen)
    sys = RewriteSystem(order, degree_bound, relations)

    counter = itertools.count()
    queue: list = []

    def push(deg, item):
        heapq.heappush(queue, (deg, next(counter), item))

    for i, p in enumerate(relations):
        if not p.is_zero():
            push(p.degree, ("input", i))

    active = set()

    while queue:
        _, _, item = heapq.heappop(queue)
        if item[0] == "input":
            i = item[1]
            base = sys._to_int(relations[i])
            deriv: List[Step] = [(Fraction(1), (), -i - 1, ())]
        elif item[0] == "requeue":
            rid = item[1]
            base = {sys._leads[rid]: Fraction(1)}
            base.update(sys._tails[rid])
            deriv = [(Fraction(1), (), rid, ())]
        else:
            _, i, j, u, v = item
            if i not in active or j not in active:
                continue
            sys.stats["overlaps"] += 1
            # S = g_i . v - u . g_j where lead_i . v = u . lead_j
            base = {}
            for w, c in ((sys._leads[i], Fraction(1)), *sys._tails[i]):
                base[w + v] = base.get(w + v, 0) + c
            for w, c in ((sys._leads[j], Fraction(1)), *sys._tails[j]):
                key = u + w
                s = base.get(key, 0) - c
                if s == 0:
                    base.pop(key, None)
                else:
                    base[key] = s
            deriv = [(Fraction(1), (), i, v), (Fraction(-1), u, j, ())]

        nf, steps = sys._reduce(base)
        if not nf:
            sys.stats["reductions_to_zero"] += 1
            continue
        if max(len(w) for w in nf) > degree_bound:
            sys.stats["discarded"] += 1
            continue
        deriv = deriv + [(-c, l, rid, r) for c, l, rid, r in steps]
        rid = sys._add_rule(nf, deriv)
        lead = sys._leads[rid]

        # rules whose lead contains the new lead are no longer reduced
        for old in list(active):
            ol = sys._leads[old]
            if len(ol) >= len(lead) and _contains(ol, lead):
                active.discard(old)
                sys._deactivate(old)
                push(len(ol), ("requeue", old))
        active.add(rid)

        for other in sorted(active):
            ol = sys._leads[other]
            for u, v, deg in _overlaps(lead, ol, degree_bound):
                push(deg, ("spoly", rid, other, u, v))
            if other != rid:
                for u, v, deg in _overlaps(ol, lead, degree_bound):
                    push(deg, ("spoly", other, rid, u, v))

    _interreduce_tails(sys)
    return sys


def _contains(big: IntWord, small: IntWord) -> bool:
    L = len(small)
    return any(big[i:i + L] == small for i in range(len(big) - L + 1))


def _interreduce_tails(sys: RewriteSystem):
    for lead, rid in sorted(sys._lead.items()):
        tail = dict(sys._tails[rid])
        nf, steps = sys._reduce(tail)
        if not steps:
            continue
        nf[lead] = Fraction(1)
        sys._deactivate(rid)
        sys._add_rule(nf, [(Fraction(1), (), rid, ())] + [(-c, l, r2, r) for c, l, r2, r in steps])


def normal_form(p: NcPoly, system: RewriteSystem) -> NcPoly:
    return system.normal_form(p)


def prove_membership(p: NcPoly, relations: Sequence[NcPoly], degree_bound: int = DEFAULT_DEGREE, order: Optional[Sequence[str]] = None) -> Union[ProofTrace, Inconclusive]:
    """Certificate that ``p`` lies in the two-sided ideal of ``relations``, if found."""
    if p.is_zero():
        return ProofTrace(p, tuple(relations), ())
    if order is None:
        names: Dict[str, None] = {}
        for q in list(relations) + [p]:
            for w in q.terms:
                for v in w:
                    names.setdefault(v, None)
        order = list(names)
    return complete(relations, degree_bound, order).prove(p)


# ---------------------------------------------------------------------------
# gadgets


@dataclass(frozen=True)
class Certificate:
    """Membership proofs for every commutator a gadget must kill.

    All proofs share the relation list and one lemma list.
    """

    kind: str
    pair: Tuple[str, ...]
    degree: int
    relations: Tuple[NcPoly, ...]
    proofs: Tuple[ProofTrace, ...]

    @property
    def lemmas(self):
        return self.proofs[0].lemmas if self.proofs else ()

    def verify(self) -> bool:
        return all(p.relations == self.relations and p.lemmas == self.lemmas and p.verify() for p in self.proofs)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "pair": list(self.pair),
            "degree": self.degree,
            "relations": [r.to_text() for r in self.relations],
            "lemmas": [{"poly": p.to_text(), "combination": _combo_json(c)} for p, c in self.lemmas],
            "proofs": [p.to_json(include_lemmas=False) for p in self.proofs],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Certificate":
        rels = tuple(NcPoly.from_text(t) for t in data["relations"])
        lemmas = tuple((NcPoly.from_text(d["poly"]), _combo_from_json(d["combination"])) for d in data["lemmas"])
        proofs = tuple(ProofTrace.from_json(p, rels, lemmas) for p in data["proofs"])
        return cls(data["kind"], tuple(data["pair"]), int(data["degree"]), rels, proofs)


def indicator_group(b: Bcs, name: str) -> List[str]:
    """Variables standing for ``name``: itself, or its color indicators ``name_<c>``."""
    if name in b.variables:
        return [name]
    prefix = name + "_"
    group = [v for v in b.variables if v.startswith(prefix) and v[len(prefix):].isdigit()]
    if not group:
        raise BcsError(f"unknown variable {name!r}")
    return sorted(group, key=lambda v: int(v[len(prefix):]))


def pair_targets(b: Bcs, pair: Tuple[str, str], kind: str) -> List[NcPoly]:
    us, vs = indicator_group(b, pair[0]), indicator_group(b, pair[1])
    sign = -1 if kind == "commute" else 1
    out = []
    for u in us:
        for v in vs:
            out.append(NcPoly.word(u, v) + NcPoly.word(v, u) * sign)
    return out


def certify_targets(gadget: Bcs, targets: Sequence[NcPoly], degree_bound: int = DEFAULT_DEGREE, kind: str = "custom", pair=("", "")):
    rels = to_polynomial_relations(gadget)
    system = complete(rels, degree_bound, gadget.variables)
    proofs = system.prove_all(targets)
    if isinstance(proofs, Inconclusive):
        return proofs
    return Certificate(kind, tuple(pair), degree_bound, tuple(rels), tuple(proofs))


def certify_gadget(gadget: Bcs, pair: Tuple[str, str], kind: str = "commute", degree_bound: int = DEFAULT_DEGREE) -> Union[Certificate, Inconclusive]:
    """Prove ``uv - vu`` (``kind="commute"``) or ``uv + vu`` (``"anticommute"``) is in the gadget ideal.

    A vertex name whose indicator variables ``name_0, name_1, ...`` exist
    expands to every per-color pair.
    """
    if kind not in ("commute", "anticommute"):
        raise ValueError(f"unknown kind {kind!r}")
    return certify_targets(gadget, pair_targets(gadget, pair, kind), degree_bound, kind, pair)


def check_extendibility(gadget: Bcs, boundary: Sequence[str]) -> bool:
    """Every admissible boundary assignment extends to the whole gadget.

    A plain boundary variable may take either bit.  A vertex name that expands
    to color indicators ranges over proper colors only (exactly one indicator
    set); the gadget's own constraints are never used to filter the boundary.
    """
    total = 1 << gadget.n
    if total > EXTENDIBILITY_LIMIT:
        raise BcsError(f"gadget too large for extendibility check ({gadget.n} variables)")
    choices = []
    for name in boundary:
        group = indicator_group(gadget, name)
        if group == [name]:
            choices.append([{name: 0}, {name: 1}])
        else:
            choices.append([{v: int(i == c) for i, v in enumerate(group)} for c in range(len(group))])
    for combo in itertools.product(*choices):
        a: Dict[str, int] = {}
        for part in combo:
            a.update(part)
        if find_satisfying(gadget, a) is None:
            return False
    return True
