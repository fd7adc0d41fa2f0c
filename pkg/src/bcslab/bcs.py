"""Binary constraint systems: data model, text format, derived games.

A :class:`Bcs` holds named binary variables and a list of constraints.
Constraint ids are positions in that list (file order).  Four constraint
kinds exist:

* :class:`Parity` -- XOR of the scope equals a bit,
* :class:`Clause` -- disjunction of literals,
* :class:`ExactlyOne` -- exactly one variable of the scope is 1,
* :class:`Table` -- explicit set of satisfying tuples.

Text format, one item per line, ``#`` starts a comment::

    domain 01|pm
    var <name>+
    parity <name>+ = 0|1
    clause <[-]name>+
    one <name>+
    table <name>+ : <bits>(,<bits>)*
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .ncpoly import NcPoly

BRUTE_FORCE_LIMIT = 30

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_'\[\]]*")


class Domain(str, Enum):
    BOOL01 = "01"
    BOOLPM = "pm"


@dataclass(frozen=True)
class Parity:
    vars: Tuple[str, ...]
    parity: int = 0

    @property
    def scope(self) -> Tuple[str, ...]:
        return self.vars

    def satisfied(self, values: Sequence[int]) -> bool:
        return sum(values) % 2 == self.parity


@dataclass(frozen=True)
class Clause:
    literals: Tuple[Tuple[str, bool], ...]

    @property
    def scope(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.literals)

    def satisfied(self, values: Sequence[int]) -> bool:
        return any(bool(x) != neg for x, (_, neg) in zip(values, self.literals))

    @classmethod
    def of(cls, *lits: str) -> "Clause":
        """``Clause.of("x", "-y")`` builds x OR NOT y."""
        return cls(tuple((l.lstrip("-+"), l.startswith("-")) for l in lits))


@dataclass(frozen=True)
class ExactlyOne:
    vars: Tuple[str, ...]

    @property
    def scope(self) -> Tuple[str, ...]:
        return self.vars

    def satisfied(self, values: Sequence[int]) -> bool:
        return sum(values) == 1


@dataclass(frozen=True)
class Table:
    vars: Tuple[str, ...]
    satisfying: FrozenSet[Tuple[int, ...]]

    @property
    def scope(self) -> Tuple[str, ...]:
        return self.vars

    def satisfied(self, values: Sequence[int]) -> bool:
        return tuple(values) in self.satisfying


Constraint = Union[Parity, Clause, ExactlyOne, Table]


class BcsError(ValueError):
    """Structural problem with a constraint system."""


class BcsParseError(BcsError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Bcs:
    variables: Tuple[str, ...] = ()
    constraints: Tuple[Constraint, ...] = ()
    domain: Domain = Domain.BOOL01

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "domain", Domain(self.domain))
        if len(set(self.variables)) != len(self.variables):
            raise BcsError("duplicate variable declaration")
        known = set(self.variables)
        for cid, c in enumerate(self.constraints):
            scope = c.scope
            if len(set(scope)) != len(scope):
                raise BcsError(f"constraint {cid}: duplicate variable in scope")
            for v in scope:
                if v not in known:
                    raise BcsError(f"constraint {cid}: unknown variable {v!r}")
            if isinstance(c, Table) and any(len(t) != len(scope) for t in c.satisfying):
                raise BcsError(f"constraint {cid}: table tuple length mismatch")
            if self.domain is Domain.BOOLPM and not isinstance(c, Parity):
                raise BcsError(f"constraint {cid}: only parity constraints allowed in domain pm")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def index(self, name: str) -> int:
        return self.variables.index(name)

    def occurrences(self) -> Dict[str, int]:
        occ = {v: 0 for v in self.variables}
        for c in self.constraints:
            for v in c.scope:
                occ[v] += 1
        return occ

    def is_satisfied_by(self, assignment: Mapping[str, int]) -> bool:
        return all(c.satisfied([assignment[v] for v in c.scope]) for c in self.constraints)


# ---------------------------------------------------------------------------
# text format


def _tokens(line: str):
    for m in re.finditer(r"\S+", line):
        yield m.group(0), m.start() + 1


def parse_bcs(text: str) -> Bcs:
    """Parse the line-oriented BCS format; errors carry line and column."""
    domain = None
    variables: List[str] = []
    declared = set()
    constraints: List[Constraint] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = list(_tokens(line))
        if not toks:
            continue
        (kw, kcol), rest = toks[0], toks[1:]

        def err(msg, col=kcol):
            return BcsParseError(msg, lineno, col)

        def name(tok, col):
            if not NAME_RE.fullmatch(tok):
                raise err(f"invalid variable name {tok!r}", col)
            return tok

        def known(tok, col):
            name(tok, col)
            if tok not in declared:
                raise err(f"unknown variable {tok!r}", col)
            return tok

        def distinct(names, cols):
            seen = set()
            for v, col in zip(names, cols):
                if v in seen:
                    raise err(f"duplicate variable {v!r} in scope", col)
                seen.add(v)

        if kw == "domain":
            if len(rest) != 1 or rest[0][0] not in ("01", "pm"):
                raise err("expected 'domain 01' or 'domain pm'")
            if domain is not None:
                raise err("domain declared twice")
            if constraints:
                raise err("domain must precede constraints")
            domain = Domain(rest[0][0])
        elif kw == "var":
            if not rest:
                raise err("'var' needs at least one name")
            for tok, col in rest:
                name(tok, col)
                if tok in declared:
                    raise err(f"variable {tok!r} declared twice", col)
                declared.add(tok)
                variables.append(tok)
        elif kw == "parity":
            if len(rest) < 3 or rest[-2][0] != "=":
                raise err("expected 'parity <name>+ = 0|1'")
            if rest[-1][0] not in ("0", "1"):
                raise err(f"parity must be 0 or 1, got {rest[-1][0]!r}", rest[-1][1])
            scope = rest[:-2]
            names = [known(t, c) for t, c in scope]
            distinct(names, [c for _, c in scope])
            constraints.append(Parity(tuple(names), int(rest[-1][0])))
        elif kw in ("clause", "one", "table") and domain is Domain.BOOLPM:
            raise err(f"'{kw}' constraints are not allowed in domain pm")
        elif kw == "clause":
            if not rest:
                raise err("'clause' needs at least one literal")
            lits = []
            for tok, col in rest:
                neg = tok.startswith("-")
                bare = tok[1:] if tok[:1] in "-+" else tok
                lits.append((known(bare, col + (len(tok) - len(bare))), neg))
            distinct([v for v, _ in lits], [c for _, c in rest])
            constraints.append(Clause(tuple(lits)))
        elif kw == "one":
            if not rest:
                raise err("'one' needs at least one name")
            names = [known(t, c) for t, c in rest]
            distinct(names, [c for _, c in rest])
            constraints.append(ExactlyOne(tuple(names)))
        elif kw == "table":
            body = line[kcol - 1 + len(kw):]
            if ":" not in body:
                raise err("expected 'table <name>+ : <bits>(,<bits>)*'")
            head, _, tail = body.partition(":")
            head_off = kcol + len(kw)
            scope = [(m.group(0), head_off + m.start()) for m in re.finditer(r"\S+", head)]
            if not scope:
                raise err("'table' needs at least one name")
            names = [known(t, c) for t, c in scope]
            distinct(names, [c for _, c in scope])
            rows = set()
            tail_off = head_off + len(head) + 1
            for m in re.finditer(r"[^,]+", tail):
                bits = m.group(0).strip()
                if not bits:
                    continue
                col = tail_off + m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
                if not re.fullmatch(r"[01]+", bits) or len(bits) != len(names):
                    raise err(f"bad satisfying tuple {bits!r}", col)
                rows.add(tuple(int(b) for b in bits))
            if tail.strip() and not rows:
                raise err("bad satisfying tuple list", tail_off)
            constraints.append(Table(tuple(names), frozenset(rows)))
        else:
            raise err(f"unknown keyword {kw!r}")

    domain = domain or Domain.BOOL01
    return Bcs(tuple(variables), tuple(constraints), domain)


def format_constraint(c: Constraint) -> str:
    if isinstance(c, Parity):
        return f"parity {' '.join(c.vars)} = {c.parity}"
    if isinstance(c, Clause):
        return "clause " + " ".join(("-" if neg else "") + v for v, neg in c.literals)
    if isinstance(c, ExactlyOne):
        return "one " + " ".join(c.vars)
    rows = ",".join("".join(map(str, t)) for t in sorted(c.satisfying))
    return f"table {' '.join(c.vars)} : {rows}".rstrip()


def serialize_bcs(b: Bcs) -> str:
    """Canonical text: domain line, one ``var`` line in index order, constraints in id order."""
    lines = [f"domain {b.domain.value}"]
    if b.variables:
        lines.append("var " + " ".join(b.variables))
    lines.extend(format_constraint(c) for c in b.constraints)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# builders and structural queries


def magic_square() -> Bcs:
    """Mermin-Peres magic square over {+1,-1}: rows even, columns 1-2 even, column 3 odd."""
    xs = tuple(f"x{j}" for j in range(1, 10))
    rows = [(1, 2, 3), (4, 5, 6), (7, 8, 9)]
    cols = [(1, 4, 7), (2, 5, 8), (3, 6, 9)]
    cons = [Parity(tuple(f"x{j}" for j in r), 0) for r in rows]
    cons += [Parity(tuple(f"x{j}" for j in c), 1 if c == (3, 6, 9) else 0) for c in cols]
    return Bcs(xs, tuple(cons), Domain.BOOLPM)


def commutation_pairs(b: Bcs) -> FrozenSet[FrozenSet[str]]:
    pairs = set()
    for c in b.constraints:
        for u, v in itertools.combinations(c.scope, 2):
            pairs.add(frozenset((u, v)))
    return frozenset(pairs)


def ordered_pairs(b: Bcs) -> List[Tuple[str, str]]:
    """Commutation pairs as ``(u, v)`` with ``index(u) < index(v)``, sorted."""
    idx = {v: i for i, v in enumerate(b.variables)}
    out = [tuple(sorted(p, key=idx.__getitem__)) for p in commutation_pairs(b)]
    return sorted(out, key=lambda p: (idx[p[0]], idx[p[1]]))


def _projector_product(scope, bits) -> NcPoly:
    acc = NcPoly.const(1)
    one = NcPoly.const(1)
    for v, a in zip(scope, bits):
        x = NcPoly.var(v)
        acc = acc * (x if a else one - x)
    return acc


def satisfying_tuples(c: Constraint) -> List[Tuple[int, ...]]:
    if isinstance(c, Table):
        return sorted(c.satisfying)
    return [t for t in itertools.product((0, 1), repeat=len(c.scope)) if c.satisfied(t)]


def constraint_polynomial(c: Constraint, domain: Domain) -> NcPoly:
    """Polynomial that vanishes exactly on operator solutions of ``c``.

    pm parity: ``x1 x2 ... xk - (-1)^parity``.  01 exactly-one: ``sum x - 1``.
    Anything else in 01: ``1 - sum over satisfying tuples of the ordered
    product of projectors``, which is self-adjoint modulo local commutativity.
    """
    if domain is Domain.BOOLPM:
        prod = NcPoly.word(*c.scope)
        return prod - (-1 if c.parity else 1)
    if isinstance(c, ExactlyOne):
        acc = NcPoly.const(-1)
        for v in c.vars:
            acc = acc + NcPoly.var(v)
        return acc
    acc = NcPoly.const(1)
    for t in satisfying_tuples(c):
        acc = acc - _projector_product(c.scope, t)
    return acc


def to_polynomial_relations(b: Bcs) -> List[NcPoly]:
    """Constraint polynomials, then x^2 - x (or x^2 - 1), then commutators.

    Commutators are stored as ``x_k x_j - x_j x_k`` for ``j < k`` (no factor
    ``i``); over the complex numbers this spans the same two-sided ideal.
    """
    rels = [constraint_polynomial(c, b.domain) for c in b.constraints]
    for v in b.variables:
        x = NcPoly.var(v)
        rels.append(x * x - (1 if b.domain is Domain.BOOLPM else x))
    for u, v in ordered_pairs(b):
        rels.append(NcPoly.word(v, u) - NcPoly.word(u, v))
    return rels


# ---------------------------------------------------------------------------
# games


@dataclass(frozen=True)
class GameSpec:
    """Finite two-player one-round game.

    ``wins[(s, t)]`` is the set of winning answer pairs ``(a, b)`` for each
    supported question pair; ``dist`` carries exact probabilities.
    """

    questions_a: Tuple
    questions_b: Tuple
    answers_a: Dict
    answers_b: Dict
    dist: Dict
    wins: Dict

    def __post_init__(self):
        total = sum(self.dist.values(), Fraction(0))
        if total != 1:
            raise BcsError(f"question distribution sums to {total}, not 1")
        for s in self.questions_a:
            if not self.answers_a.get(s):
                raise BcsError(f"empty answer set for question {s!r}")
        for t in self.questions_b:
            if not self.answers_b.get(t):
                raise BcsError(f"empty answer set for question {t!r}")
        if set(self.wins) != set(self.dist):
            raise BcsError("verifier must be defined exactly on supported question pairs")
        for (s, t), w in self.wins.items():
            for a, b in w:
                if a not in self.answers_a[s] or b not in self.answers_b[t]:
                    raise BcsError(f"winning pair {(a, b)!r} outside answer sets at {(s, t)!r}")

    def V(self, a, b, s, t) -> int:
        return int((a, b) in self.wins.get((s, t), ()))


def derive_game(b: Bcs) -> GameSpec:
    """BCS game: constraint to Alice, one of its variables to Bob, uniformly."""
    pairs = []
    for s, c in enumerate(b.constraints):
        if not c.scope:
            raise BcsError(f"constraint {s} has empty scope")
        pairs.extend((s, t) for t in c.scope)
    p = Fraction(1, len(pairs)) if pairs else Fraction(0)
    answers_a = {s: tuple(itertools.product((0, 1), repeat=len(c.scope))) for s, c in enumerate(b.constraints)}
    answers_b = {t: (0, 1) for t in b.variables}
    wins = {}
    for s, t in pairs:
        c = b.constraints[s]
        k = c.scope.index(t)
        wins[(s, t)] = frozenset((a, a[k]) for a in answers_a[s] if c.satisfied(a))
    return GameSpec(
        questions_a=tuple(range(b.m)),
        questions_b=tuple(b.variables),
        answers_a=answers_a,
        answers_b=answers_b,
        dist={st: p for st in pairs},
        wins=wins,
    )


# ---------------------------------------------------------------------------
# classical search


def _status(c: Constraint, vals: Sequence[Optional[int]]) -> bool:
    """False iff no completion of the partial tuple can satisfy ``c``."""
    if isinstance(c, Clause):
        for x, (_, neg) in zip(vals, c.literals):
            if x is None or bool(x) != neg:
                return True
        return False
    if isinstance(c, ExactlyOne):
        ones = sum(1 for x in vals if x == 1)
        if ones > 1:
            return False
        return ones == 1 or any(x is None for x in vals)
    if isinstance(c, Parity):
        if any(x is None for x in vals):
            return True
        return sum(vals) % 2 == c.parity
    return any(all(x is None or x == t for x, t in zip(vals, row)) for row in c.satisfying)


def find_satisfying(b: Bcs, pinned: Mapping[str, int] | None = None) -> Optional[Dict[str, int]]:
    """Depth-first search in variable order, 0 before 1.

    Returns the lexicographically first satisfying assignment (extending
    ``pinned``) or ``None``.  Exhaustive: pruning only discards partial
    assignments that already violate some constraint.
    """
    pinned = dict(pinned or {})
    order = [v for v in b.variables if v not in pinned]
    pos = {v: i for i, v in enumerate(order)}
    values: Dict[str, Optional[int]] = {v: None for v in b.variables}
    values.update(pinned)

    watch: List[List[int]] = [[] for _ in order]
    for cid, c in enumerate(b.constraints):
        free = [pos[v] for v in c.scope if v in pos]
        if not free:
            if not c.satisfied([values[v] for v in c.scope]):
                return None
            continue
        for i in set(free):
            watch[i].append(cid)

    def ok(i):
        for cid in watch[i]:
            c = b.constraints[cid]
            if not _status(c, [values[v] for v in c.scope]):
                return False
        return True

    n = len(order)
    if n == 0:
        return {v: values[v] for v in b.variables}
    # iterative DFS; choice[i] is the value currently tried at depth i
    choice = [-1] * n
    i = 0
    while i >= 0:
        if choice[i] < 1:
            choice[i] += 1
            values[order[i]] = choice[i]
            if ok(i):
                if i == n - 1:
                    return {v: values[v] for v in b.variables}
                i += 1
        else:
            choice[i] = -1
            values[order[i]] = None
            i -= 1
    return None


def classical_solve_bruteforce(b: Bcs) -> Optional[Dict[str, int]]:
    """Lexicographically first satisfying 0/1 assignment, or ``None``."""
    if b.n > BRUTE_FORCE_LIMIT:
        raise BcsError(f"brute force limited to {BRUTE_FORCE_LIMIT} variables, got {b.n}")
    return find_satisfying(b)


def all_satisfying(b: Bcs) -> Iterable[Dict[str, int]]:
    """Plain enumeration over {0,1}^n in lexicographic order."""
    if b.n > BRUTE_FORCE_LIMIT:
        raise BcsError(f"brute force limited to {BRUTE_FORCE_LIMIT} variables, got {b.n}")
    for bits in itertools.product((0, 1), repeat=b.n):
        a = dict(zip(b.variables, bits))
        if b.is_satisfied_by(a):
            yield a
