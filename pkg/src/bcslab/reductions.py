"""Encodings into BCS form and reductions between constraint problems.

Every reduction returns its target together with a :class:`ReductionTrace`
listing where each source variable went and which gadgets were attached,
so that a classical solution of the source can be pushed forward
(:func:`complete_forward`) and audited.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .bcs import (
    Bcs,
    BcsError,
    BcsParseError,
    Clause,
    Domain,
    ExactlyOne,
    GameSpec,
    NAME_RE,
    Parity,
    Table,
    find_satisfying,
    serialize_bcs,
)

# ---------------------------------------------------------------------------
# graphs


@dataclass(frozen=True)
class ColoringInstance:
    vertices: Tuple[str, ...]
    edges: FrozenSet[FrozenSet[str]]
    k: int = 3

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if not (isinstance(self.edges, frozenset) and all(type(e) is frozenset for e in self.edges)):
            object.__setattr__(self, "edges", frozenset(frozenset(e) for e in self.edges))
        if len(set(self.vertices)) != len(self.vertices):
            raise BcsError("duplicate vertex")
        known = set(self.vertices)
        for e in self.edges:
            if len(e) != 2:
                raise BcsError(f"self-loop or malformed edge {sorted(e)}")
            for v in e:
                if v not in known:
                    raise BcsError(f"edge references unknown vertex {v!r}")

    @cached_property
    def _adjacency(self) -> Dict[str, FrozenSet[str]]:
        adj = {v: set() for v in self.vertices}
        for u, v in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(ws) for v, ws in adj.items()}

    @classmethod
    def _trusted(cls, vertices, edges, k) -> "ColoringInstance":
        # skips validation; for graphs built edge by edge from known vertices
        g = object.__new__(cls)
        object.__setattr__(g, "vertices", tuple(vertices))
        object.__setattr__(g, "edges", frozenset(edges))
        object.__setattr__(g, "k", k)
        return g

    def neighbours(self) -> Dict[str, FrozenSet[str]]:
        return self._adjacency

    def is_proper(self, colouring: Mapping[str, int]) -> bool:
        if any(not 0 <= colouring.get(v, -1) < self.k for v in self.vertices):
            return False
        return all(colouring[u] != colouring[v] for u, v in self.edges)

    def sorted_edges(self) -> List[Tuple[str, str]]:
        idx = {v: i for i, v in enumerate(self.vertices)}
        return sorted((tuple(sorted(e, key=idx.get)) for e in self.edges), key=lambda p: (idx[p[0]], idx[p[1]]))

    def induced(self, keep: Iterable[str]) -> "ColoringInstance":
        keep = set(keep)
        return ColoringInstance(
            tuple(v for v in self.vertices if v in keep),
            frozenset(e for e in self.edges if e <= keep),
            self.k,
        )


def parse_graph(text: str, k: int = 3) -> ColoringInstance:
    """``v <name>`` and ``e <name> <name>`` lines; ``#`` starts a comment."""
    vertices, edges = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        parts = line.split()
        if not parts:
            continue
        col = raw.index(parts[0]) + 1
        for tok in parts[1:]:
            if not NAME_RE.fullmatch(tok):
                raise BcsParseError(f"bad vertex name {tok!r}", lineno, raw.index(tok) + 1)
        if parts[0] == "v" and len(parts) >= 2:
            vertices.extend(parts[1:])
        elif parts[0] == "e" and len(parts) == 3:
            edges.append(frozenset(parts[1:]))
        else:
            raise BcsParseError(f"expected 'v <name>' or 'e <name> <name>', got {line.strip()!r}", lineno, col)
    try:
        return ColoringInstance(tuple(vertices), frozenset(edges), k)
    except BcsError as exc:
        raise BcsParseError(str(exc), 0, 0) from None


def serialize_graph(g: ColoringInstance) -> str:
    lines = [f"v {v}" for v in g.vertices]
    lines += [f"e {u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def find_colouring(g: ColoringInstance) -> Optional[Dict[str, int]]:
    """Exhaustive backtracking k-colouring (DSATUR order, smallest colour first)."""
    adj = g.neighbours()
    colour: Dict[str, int] = {}
    if not g.vertices:
        return {}
    if g.k <= 0:
        return None
    order_key = {v: i for i, v in enumerate(g.vertices)}

    def pick():
        best, key = None, None
        for v in g.vertices:
            if v in colour:
                continue
            sat = len({colour[w] for w in adj[v] if w in colour})
            kk = (sat, len(adj[v]), -order_key[v])
            if key is None or kk > key:
                best, key = v, kk
        return best

    def rec(depth):
        if depth == len(g.vertices):
            return True
        v = pick()
        used = {colour[w] for w in adj[v] if w in colour}
        # symmetry: never open more than one fresh colour at a time
        top = max(colour.values(), default=-1)
        for c in range(min(g.k, top + 2)):
            if c in used:
                continue
            colour[v] = c
            if rec(depth + 1):
                return True
            del colour[v]
        return False

    import sys

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * len(g.vertices) + 100))
    try:
        ok = rec(0)
    finally:
        sys.setrecursionlimit(limit)
    return dict(colour) if ok else None


# ---------------------------------------------------------------------------
# traces


@dataclass
class GadgetRecord:
    kind: str
    pair: Tuple[str, ...]
    fresh: Tuple[str, ...]

    def to_json(self) -> dict:
        return {"kind": self.kind, "pair": list(self.pair), "fresh": list(self.fresh)}


@dataclass
class ReductionTrace:
    kind: str
    source: Union[Bcs, ColoringInstance]
    target: Union[Bcs, ColoringInstance]
    var_map: Dict[str, Tuple[str, ...]]
    gadgets: List[GadgetRecord] = field(default_factory=list)
    # fresh target objects introduced by the core reduction, in creation order
    core_fresh: List[Tuple[str, ...]] = field(default_factory=list)

    def source_names(self) -> set:
        s = self.source
        return set(s.variables) if isinstance(s, Bcs) else set(s.vertices)

    def target_names(self) -> set:
        t = self.target
        return set(t.variables) if isinstance(t, Bcs) else set(t.vertices)

    def fresh_names(self) -> set:
        out = set()
        for g in self.gadgets:
            out.update(g.fresh)
        for grp in self.core_fresh:
            out.update(grp)
        return out

    def to_json(self) -> dict:
        def text(x):
            return serialize_bcs(x) if isinstance(x, Bcs) else serialize_graph(x)

        return {
            "kind": self.kind,
            "source": text(self.source),
            "target": text(self.target),
            "var_map": {v: list(t) for v, t in self.var_map.items()},
            "core": [list(g) for g in self.core_fresh],
            "gadgets": [g.to_json() for g in self.gadgets],
        }


class NameSupply:
    """Hands out names that avoid a reserved set."""

    def __init__(self, reserved: Iterable[str] = ()):
        self.taken = set(reserved)

    def take(self, base: str) -> str:
        if base not in self.taken:
            self.taken.add(base)
            return base
        name = base
        k = 1
        while name in self.taken:
            name = f"{base}_{k}"
            k += 1
        self.taken.add(name)
        return name


# ---------------------------------------------------------------------------
# encodings


def coloring_to_bcs(g: ColoringInstance) -> Bcs:
    """Indicator variables ``<v>_<colour>``; one colour per vertex, different colours on edges."""
    if g.k < 1:
        raise BcsError("colour count must be positive")
    var = {v: [f"{v}_{a}" for a in range(g.k)] for v in g.vertices}
    variables = [x for v in g.vertices for x in var[v]]
    cons = [ExactlyOne(tuple(var[v])) for v in g.vertices]
    for u, v in g.sorted_edges():
        for a in range(g.k):
            cons.append(Clause(((var[u][a], True), (var[v][a], True))))
    return Bcs(tuple(variables), tuple(cons), Domain.BOOL01)


def colouring_values(g: ColoringInstance, colouring: Mapping[str, int]) -> Dict[str, int]:
    """0/1 indicator values of :func:`coloring_to_bcs` for a colouring."""
    return {f"{v}_{a}": int(colouring[v] == a) for v in g.vertices for a in range(g.k)}


def ks_to_bcs(sets: Sequence[Iterable[str]], universe: Sequence[str]) -> Bcs:
    known = set(universe)
    cons = []
    for i, s in enumerate(sets):
        s = tuple(s)
        if not s:
            raise BcsError(f"set {i} is empty")
        missing = [v for v in s if v not in known]
        if missing:
            raise BcsError(f"set {i} has elements outside the universe: {missing}")
        cons.append(ExactlyOne(s))
    return Bcs(tuple(universe), tuple(cons), Domain.BOOL01)


_TOKEN_BAD = re.compile(r"[^A-Za-z0-9_'\[\]]")


def _token(x) -> str:
    if isinstance(x, tuple):
        return "".join(_token(v) for v in x)
    return _TOKEN_BAD.sub("_", str(x))


def game_to_bcs(g: GameSpec) -> Bcs:
    """Projector encoding: x_<s>_<a>, y_<t>_<b>; one answer per question; losing pairs annihilate."""
    xa = {(s, a): f"x_{_token(s)}_{_token(a)}" for s in g.questions_a for a in g.answers_a[s]}
    yb = {(t, b): f"y_{_token(t)}_{_token(b)}" for t in g.questions_b for b in g.answers_b[t]}
    names = list(xa.values()) + list(yb.values())
    if len(set(names)) != len(names):
        raise BcsError("question/answer labels collide after name sanitising")
    cons = [ExactlyOne(tuple(xa[s, a] for a in g.answers_a[s])) for s in g.questions_a]
    cons += [ExactlyOne(tuple(yb[t, b] for b in g.answers_b[t])) for t in g.questions_b]
    for (s, t) in g.dist:
        wins = g.wins[(s, t)]
        for a in g.answers_a[s]:
            for b in g.answers_b[t]:
                if (a, b) not in wins:
                    cons.append(Clause(((xa[s, a], True), (yb[t, b], True))))
    return Bcs(tuple(names), tuple(cons), Domain.BOOL01)


# ---------------------------------------------------------------------------
# gadgets


def prism_graph() -> ColoringInstance:
    """Triangles abc and def joined by the rungs ad, be, cf."""
    edges = ["ab", "bc", "ca", "de", "ef", "fd", "ad", "be", "cf"]
    return ColoringInstance(tuple("abcdef"), frozenset(frozenset(e) for e in edges), 3)


def prism_gadget() -> Bcs:
    return coloring_to_bcs(prism_graph())


def triangle_bcs() -> Bcs:
    return coloring_to_bcs(ColoringInstance(("u", "v", "w"), frozenset(map(frozenset, ["uv", "vw", "wu"])), 3))


def onein3_gadget() -> Bcs:
    """Three exactly-one constraints forcing x and y to commute."""
    return Bcs(
        ("x", "y", "u1", "u2", "u3", "u4"),
        (ExactlyOne(("x", "u1", "u4")), ExactlyOne(("y", "u2", "u4")), ExactlyOne(("u1", "u2", "u3"))),
        Domain.BOOL01,
    )


# ---------------------------------------------------------------------------
# SAT-side helpers


def _require_clauses(b: Bcs, max_arity: Optional[int] = None) -> List[Clause]:
    out = []
    for cid, c in enumerate(b.constraints):
        if not isinstance(c, Clause):
            raise BcsError(f"constraint {cid} is not a clause")
        if max_arity is not None and len(c.literals) > max_arity:
            raise BcsError(f"constraint {cid} has arity {len(c.literals)} > {max_arity}")
        out.append(c)
    return out


def _pad3(c: Clause) -> List[Tuple[str, bool]]:
    lits = list(c.literals)
    if not lits:
        raise BcsError("empty clause cannot be padded")
    while len(lits) < 3:
        lits.append(lits[-1])
    return lits


# ---------------------------------------------------------------------------
# 3-SAT -> 3-colouring


def reduce_3sat_to_3coloring(b: Bcs) -> Tuple[ColoringInstance, ReductionTrace]:
    clauses = _require_clauses(b, 3)
    names = NameSupply(b.variables)
    # the literal vertex for x reuses the name x; its negation is fresh
    names.taken.update(b.variables)
    F, T, B = names.take("F"), names.take("T"), names.take("B")
    vertices = [F, T, B]
    edges = {frozenset((F, T)), frozenset((T, B)), frozenset((B, F))}
    lit_vertex: Dict[Tuple[str, bool], str] = {}
    var_map = {}
    core = [(F, T, B)]
    for x in b.variables:
        nx = names.take(f"{x}'")
        lit_vertex[(x, False)], lit_vertex[(x, True)] = x, nx
        vertices += [x, nx]
        edges |= {frozenset((x, nx)), frozenset((x, B)), frozenset((nx, B))}
        var_map[x] = (x, nx)
        core.append((nx,))

    clause_sets = []
    for j, c in enumerate(clauses):
        l1, l2, l3 = (lit_vertex[l] for l in _pad3(c))
        a1, a2, o1, b1, b2, o2 = (names.take(f"or{j}_{k}") for k in range(1, 7))
        vertices += [a1, a2, o1, b1, b2, o2]
        new = [(a1, a2), (a2, o1), (o1, a1), (l1, a1), (l2, a2),
               (b1, b2), (b2, o2), (o2, b1), (o1, b1), (l3, b2),
               (o2, F), (o2, B)]
        edges.update(map(frozenset, new))
        core.append((a1, a2, o1, b1, b2, o2))
        # the OR vertices plus every outside vertex they touch
        clause_sets.append([a1, a2, o1, b1, b2, o2, *dict.fromkeys((l1, l2, l3)), F, B])

    gadgets = []
    done = set()
    for group in clause_sets:
        for u, v in itertools.combinations(group, 2):
            pair = frozenset((u, v))
            if pair in edges or pair in done:
                continue
            done.add(pair)
            i = len(gadgets)
            pb, pc, pd, pf = [names.take(f"pr{i}_{s}") for s in "bcdf"]
            vertices += [pb, pc, pd, pf]
            # u plays a, v plays e
            edges.update([frozenset((u, pb)), frozenset((pb, pc)), frozenset((pc, u)),
                          frozenset((pd, v)), frozenset((v, pf)), frozenset((pf, pd)),
                          frozenset((u, pd)), frozenset((pb, v)), frozenset((pc, pf))])
            gadgets.append(GadgetRecord("prism", (u, v), (pb, pc, pd, pf)))

    target = ColoringInstance._trusted(vertices, edges, 3)
    trace = ReductionTrace("3sat->3coloring", b, target, var_map, gadgets, core)
    return target, trace


# ---------------------------------------------------------------------------
# 3-SAT -> 1-in-3-SAT


def reduce_3sat_to_1in3(b: Bcs) -> Tuple[Bcs, ReductionTrace]:
    clauses = _require_clauses(b, 3)
    names = NameSupply(b.variables)
    variables = list(b.variables)
    cons: List = []
    var_map = {x: (x,) for x in b.variables}
    core = []
    zero, one_a, one_b = names.take("zero"), names.take("one_a"), names.take("one_b")
    variables += [zero, one_a, one_b]
    cons += [ExactlyOne((zero, one_a, one_b)), ExactlyOne((one_a, one_b))]
    core.append((zero, one_a, one_b))

    negation: Dict[str, str] = {}

    def literal(lit):
        x, neg = lit
        if not neg:
            return x
        if x not in negation:
            nx = names.take(f"{x}'")
            negation[x] = nx
            variables.append(nx)
            cons.append(ExactlyOne((x, nx)))
            var_map[x] = (x, nx)
            core.append((nx,))
        return negation[x]

    gadgets = []
    for j, c in enumerate(clauses):
        x, y, z = (literal(l) for l in _pad3(c))
        u = [names.take(f"u{j}_{k}") for k in range(1, 7)]
        variables += u
        core.append(tuple(u))
        cons += [
            ExactlyOne((x, u[0], u[3])),
            ExactlyOne((y, u[1], u[3])),
            ExactlyOne((u[0], u[1], u[2])),
            ExactlyOne((u[3], u[4], u[5])),
            ExactlyOne(tuple(dict.fromkeys((z, u[4], zero)))),
        ]
        for p, q in ((x, z), (y, z)):
            if p == q:
                continue
            g = [names.take(f"g{len(gadgets)}_{k}") for k in range(1, 5)]
            variables += g
            cons += [
                ExactlyOne((p, g[0], g[3])),
                ExactlyOne((q, g[1], g[3])),
                ExactlyOne((g[0], g[1], g[2])),
            ]
            gadgets.append(GadgetRecord("onein3", (p, q), tuple(g)))

    target = Bcs(tuple(variables), tuple(cons), Domain.BOOL01)
    return target, ReductionTrace("3sat->1in3", b, target, var_map, gadgets, core)


# ---------------------------------------------------------------------------
# k-SAT -> 3-SAT, hardening, occurrence reduction


def reduce_ksat_to_3sat(b: Bcs) -> Tuple[Bcs, ReductionTrace]:
    clauses = _require_clauses(b)
    names = NameSupply(b.variables)
    variables = list(b.variables)
    cons: List[Clause] = []
    gadgets, core = [], []
    for j, c in enumerate(clauses):
        lits = list(c.literals)
        k = len(lits)
        if k <= 3:
            cons.append(c)
            continue
        ys = [names.take(f"y{j}_{i}") for i in range(1, k - 2)]
        variables += ys
        core.append(tuple(ys))
        produced = [Clause((lits[0], lits[1], (ys[0], False)))]
        for i in range(1, k - 3):
            produced.append(Clause(((ys[i - 1], True), lits[i + 1], (ys[i], False))))
        produced.append(Clause(((ys[-1], True), lits[-2], lits[-1])))
        cons += produced
        together = set()
        for pc in produced:
            together |= {frozenset(p) for p in itertools.combinations(pc.scope, 2)}
        for p, q in itertools.combinations([v for v, _ in lits] + ys, 2):
            if frozenset((p, q)) in together:
                continue
            z = names.take(f"z{len(gadgets)}")
            variables.append(z)
            cons.append(Clause(((p, False), (q, False), (z, False))))
            gadgets.append(GadgetRecord("clause", (p, q), (z,)))
    target = Bcs(tuple(variables), tuple(cons), Domain.BOOL01)
    return target, ReductionTrace("ksat->3sat", b, target, {x: (x,) for x in b.variables}, gadgets, core)


def harden_3sat(b: Bcs) -> Tuple[Bcs, ReductionTrace]:
    """Give every pair of variables a shared clause (x or y or fresh)."""
    clauses = _require_clauses(b, 3)
    names = NameSupply(b.variables)
    together = set()
    for c in clauses:
        together |= {frozenset(p) for p in itertools.combinations(c.scope, 2)}
    variables = list(b.variables)
    cons = list(clauses)
    gadgets = []
    for p, q in itertools.combinations(b.variables, 2):
        if frozenset((p, q)) in together:
            continue
        y = names.take(f"h{len(gadgets)}")
        variables.append(y)
        cons.append(Clause(((p, False), (q, False), (y, False))))
        gadgets.append(GadgetRecord("clause", (p, q), (y,)))
    target = Bcs(tuple(variables), tuple(cons), Domain.BOOL01)
    return target, ReductionTrace("harden", b, target, {x: (x,) for x in b.variables}, gadgets)


def rename_constraint(c, mapping: Mapping[str, str]):
    r = lambda v: mapping.get(v, v)
    if isinstance(c, Parity):
        return Parity(tuple(map(r, c.vars)), c.parity)
    if isinstance(c, Clause):
        return Clause(tuple((r(v), neg) for v, neg in c.literals))
    if isinstance(c, ExactlyOne):
        return ExactlyOne(tuple(map(r, c.vars)))
    return Table(tuple(map(r, c.vars)), c.satisfying)


def occurrence_reduce(b: Bcs, limit: int = 3) -> Tuple[Bcs, ReductionTrace]:
    """Split heavily used variables over the leaves of an equality tree.

    A variable in k > limit constraints becomes a binary tree with k leaves
    whose edges are ``parity u v = 0``; internal nodes carry only tree edges
    (at most three) and each leaf carries one original constraint.
    """
    if limit < 3:
        raise BcsError("occurrence limit must be at least 3")
    names = NameSupply(b.variables)
    occ: Dict[str, List[int]] = {v: [] for v in b.variables}
    for cid, c in enumerate(b.constraints):
        for v in c.scope:
            occ[v].append(cid)
    variables: List[str] = []
    per_constraint: List[Dict[str, str]] = [{} for _ in b.constraints]
    tree_cons: List[Parity] = []
    var_map, core = {}, []
    for v in b.variables:
        uses = occ[v]
        if len(uses) <= limit:
            variables.append(v)
            var_map[v] = (v,)
            continue
        k = len(uses)
        # heap layout: node i has children 2i+1, 2i+2; nodes k-1 .. 2k-2 are the leaves
        nodes = [v] + [names.take(f"{v}_t{i}") for i in range(1, 2 * k - 1)]
        variables += nodes
        for i in range(1, 2 * k - 1):
            tree_cons.append(Parity((nodes[(i - 1) // 2], nodes[i]), 0))
        for leaf, cid in zip(nodes[k - 1:], uses):
            per_constraint[cid][v] = leaf
        var_map[v] = tuple(nodes)
        core.append(tuple(nodes[1:]))
    cons = [rename_constraint(c, per_constraint[cid]) for cid, c in enumerate(b.constraints)] + tree_cons
    target = Bcs(tuple(variables), tuple(cons), b.domain)
    return target, ReductionTrace("occurrence", b, target, var_map, [], core)


# ---------------------------------------------------------------------------
# pushing classical solutions forward


def _colour_groups(g: ColoringInstance, fixed: Dict[str, int], groups: Sequence[Sequence[str]]) -> Optional[Dict[str, int]]:
    """Colour each group in turn by local backtracking against what is already coloured."""
    adj = g.neighbours()
    colour = dict(fixed)
    for group in groups:
        group = [v for v in group if v not in colour]

        def rec(i):
            if i == len(group):
                return True
            v = group[i]
            used = {colour[w] for w in adj[v] if w in colour}
            for c in range(g.k):
                if c not in used:
                    colour[v] = c
                    if rec(i + 1):
                        return True
                    del colour[v]
            return False

        if not rec(0):
            return None
    return colour


def complete_forward(trace: ReductionTrace, values: Mapping[str, int]):
    """Extend a classical source solution to a target solution, guided by the trace.

    Returns 0/1 values for BCS targets and a colouring for graph targets;
    ``None`` if the guided completion gets stuck.
    """
    t = trace.target
    if isinstance(t, ColoringInstance):
        F, T, B = trace.core_fresh[0]
        fixed = {F: 0, T: 1, B: 2}
        for x, (pos, neg) in trace.var_map.items():
            fixed[pos] = 1 if values[x] else 0
            fixed[neg] = 0 if values[x] else 1
        groups = [grp for grp in trace.core_fresh[1:]] + [g.fresh for g in trace.gadgets]
        return _colour_groups(t, fixed, groups)
    pinned = dict(values)
    if trace.kind == "occurrence":
        pinned = {n: values[x] for x, nodes in trace.var_map.items() for n in nodes}
    elif trace.kind == "3sat->1in3":
        for x, names in trace.var_map.items():
            if len(names) == 2:
                pinned[names[1]] = 1 - values[x]
    return find_satisfying(t, pinned)
