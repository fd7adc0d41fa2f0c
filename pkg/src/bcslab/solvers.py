"""Polynomial-time solvers (2-SAT, Horn-SAT, GF(2) parity) and classical game values."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bcs import Bcs, BcsError, Clause, GameSpec, Parity

Literal = Tuple[str, bool]  # (variable, negated)

GAME_VALUE_LIMIT = 20


def _neg(lit: Literal) -> Literal:
    return (lit[0], not lit[1])


def _clauses(b: Bcs, max_arity: Optional[int] = None) -> List[Clause]:
    out = []
    for cid, c in enumerate(b.constraints):
        if not isinstance(c, Clause):
            raise BcsError(f"constraint {cid} is not a clause")
        if max_arity is not None and len(c.literals) > max_arity:
            raise BcsError(f"constraint {cid} has {len(c.literals)} literals, at most {max_arity} allowed")
        out.append(c)
    return out


# ---------------------------------------------------------------------------
# 2-SAT


@dataclass
class ImplicationGraph:
    """Directed graph on literals; clause (p or q) adds edges -p -> q and -q -> p."""

    vertices: List[Literal]
    edges: Dict[Literal, List[Literal]]
    scc_id: Dict[Literal, int] = field(default_factory=dict)
    edge_visits: int = 0

    @classmethod
    def from_bcs(cls, b: Bcs) -> "ImplicationGraph":
        verts = [(v, neg) for v in b.variables for neg in (False, True)]
        edges: Dict[Literal, List[Literal]] = {u: [] for u in verts}
        for c in _clauses(b, 2):
            lits = list(c.literals)
            if not lits:
                continue
            if len(lits) == 1:
                lits = lits * 2
            p, q = lits
            edges[_neg(p)].append(q)
            edges[_neg(q)].append(p)
        return cls(verts, edges)

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.edges.values())

    def strongly_connected(self) -> Dict[Literal, int]:
        """Iterative Tarjan; component ids come out in reverse topological order."""
        index: Dict[Literal, int] = {}
        low: Dict[Literal, int] = {}
        on_stack = set()
        stack: List[Literal] = []
        comp: Dict[Literal, int] = {}
        counter = 0
        visits = 0
        ncomp = 0
        for root in self.vertices:
            if root in index:
                continue
            work = [(root, 0)]
            index[root] = low[root] = counter
            counter += 1
            stack.append(root)
            on_stack.add(root)
            while work:
                v, i = work[-1]
                succ = self.edges[v]
                if i < len(succ):
                    work[-1] = (v, i + 1)
                    w = succ[i]
                    visits += 1
                    if w not in index:
                        index[w] = low[w] = counter
                        counter += 1
                        stack.append(w)
                        on_stack.add(w)
                        work.append((w, 0))
                    elif w in on_stack:
                        low[v] = min(low[v], index[w])
                    continue
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
        self.scc_id = comp
        self.edge_visits = visits
        return comp


def solve_2sat(b: Bcs) -> Optional[Dict[str, int]]:
    g = ImplicationGraph.from_bcs(b)
    if any(not c.literals for c in b.constraints):
        return None
    comp = g.strongly_connected()
    out = {}
    for v in b.variables:
        pos, neg = comp[(v, False)], comp[(v, True)]
        if pos == neg:
            return None
        # Tarjan numbers sinks first: take the literal closer to a sink
        out[v] = 1 if pos < neg else 0
    return out


# ---------------------------------------------------------------------------
# Horn-SAT

TRUE = "<TRUE>"
FALSE = "<FALSE>"


@dataclass
class HornGraph:
    """Labelled edges (sources -> target, clause id).

    Clause j with negative literals N and positive literal p gives an edge
    from each n in N (or TRUE when N is empty) to p, or to FALSE when the
    clause has no positive literal.  The clause fires once all its sources
    are pebbled.
    """

    vertices: List[str]
    edges: List[Tuple[str, str, int]]
    body: Dict[int, Tuple[str, ...]]
    head: Dict[int, str]

    @classmethod
    def from_bcs(cls, b: Bcs) -> "HornGraph":
        edges, body, head = [], {}, {}
        for j, c in enumerate(_clauses(b)):
            pos = [v for v, neg in c.literals if not neg]
            if len(pos) > 1:
                raise BcsError(f"constraint {j} is not Horn (two positive literals)")
            negs = tuple(dict.fromkeys(v for v, neg in c.literals if neg))
            target = pos[0] if pos else FALSE
            sources = negs or (TRUE,)
            body[j] = sources
            head[j] = target
            edges.extend((s, target, j) for s in sources)
        return cls([TRUE, FALSE, *b.variables], edges, body, head)

    def pebble(self) -> set:
        """Everything derivable from TRUE by firing clauses (unit propagation)."""
        waiting = {j: len(set(src)) for j, src in self.body.items()}
        watchers: Dict[str, List[int]] = {}
        for j, src in self.body.items():
            for s in set(src):
                watchers.setdefault(s, []).append(j)
        pebbled = {TRUE}
        queue = [TRUE]
        while queue:
            v = queue.pop()
            for j in watchers.get(v, ()):
                waiting[j] -= 1
                if waiting[j] == 0 and self.head[j] not in pebbled:
                    pebbled.add(self.head[j])
                    queue.append(self.head[j])
        return pebbled


def solve_hornsat(b: Bcs) -> Optional[Dict[str, int]]:
    """Minimal model of a Horn formula, or None."""
    peb = HornGraph.from_bcs(b).pebble()
    if FALSE in peb:
        return None
    return {v: int(v in peb) for v in b.variables}


# ---------------------------------------------------------------------------
# parity systems over GF(2)


def parity_matrix(b: Bcs) -> Tuple[np.ndarray, np.ndarray]:
    rows = np.zeros((b.m, b.n), dtype=np.uint8)
    rhs = np.zeros(b.m, dtype=np.uint8)
    for cid, c in enumerate(b.constraints):
        if not isinstance(c, Parity):
            raise BcsError(f"constraint {cid} is not a parity constraint")
        for v in c.vars:
            rows[cid, b.index(v)] ^= 1
        rhs[cid] = c.parity
    return rows, rhs


def gf2_rref(a: np.ndarray, rhs: np.ndarray):
    """Row-reduce ``[a | rhs]`` over GF(2); returns (a, rhs, pivot columns)."""
    a, rhs = a.copy(), rhs.copy()
    pivots = []
    r = 0
    for col in range(a.shape[1]):
        hits = np.nonzero(a[r:, col])[0]
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            a[[r, p]] = a[[p, r]]
            rhs[[r, p]] = rhs[[p, r]]
        mask = a[:, col].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        rhs[mask] ^= rhs[r]
        pivots.append(col)
        r += 1
        if r == a.shape[0]:
            break
    return a, rhs, pivots


def gf2_rank(b: Bcs) -> int:
    a, rhs = parity_matrix(b)
    return len(gf2_rref(a, rhs)[2])


def solve_parity_gf2(b: Bcs) -> Optional[Dict[str, int]]:
    """Classical solution of a parity system with free variables set to 0."""
    a, rhs = parity_matrix(b)
    a, rhs, pivots = gf2_rref(a, rhs)
    if np.any(rhs[len(pivots):]):
        return None
    x = np.zeros(b.n, dtype=np.uint8)
    for r, col in enumerate(pivots):
        x[col] = rhs[r]
    return {v: int(x[i]) for i, v in enumerate(b.variables)}


# ---------------------------------------------------------------------------
# classical game value


def classical_game_value(g: GameSpec) -> Fraction:
    """Exact optimum over deterministic strategies.

    Enumerates Bob's answer functions; for each, Alice answers every question
    independently with her best response.
    """
    ts = list(g.questions_b)
    if len(ts) > GAME_VALUE_LIMIT:
        raise BcsError(f"{len(ts)} Bob questions exceed the limit of {GAME_VALUE_LIMIT}")
    by_s: Dict[object, List[Tuple[object, Fraction]]] = {}
    for (s, t), p in g.dist.items():
        by_s.setdefault(s, []).append((t, p))
    best = Fraction(0)
    for choice in itertools.product(*(g.answers_b[t] for t in ts)):
        bob = dict(zip(ts, choice))
        total = Fraction(0)
        for s, pairs in by_s.items():
            total += max(
                sum((p for t, p in pairs if (a, bob[t]) in g.wins[(s, t)]), Fraction(0))
                for a in g.answers_a[s]
            )
        if total > best:
            best = total
            if best == 1:
                break
    return best
