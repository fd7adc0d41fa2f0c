import glob
import os
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bcslab.bcs import (
    Bcs,
    BcsError,
    BcsParseError,
    Clause,
    Domain,
    ExactlyOne,
    Parity,
    Table,
    all_satisfying,
    classical_solve_bruteforce,
    commutation_pairs,
    derive_game,
    find_satisfying,
    magic_square,
    parse_bcs,
    serialize_bcs,
    to_polynomial_relations,
)
from bcslab.ncpoly import I_UNIT, NcPoly
from bcslab.rewrite import complete, normal_form

from oracles import brute_sat, random_clause_bcs, satisfies

CORPUS = sorted(glob.glob(os.path.join(os.path.dirname(__file__), "corpus", "*.bcs")))


def read(path):
    with open(path) as fh:
        return fh.read()


# ---------------------------------------------------------------- parsing


def test_parse_magic_square_text():
    text = """domain pm
var x1 x2 x3 x4 x5 x6 x7 x8 x9
parity x1 x2 x3 = 0
parity x4 x5 x6 = 0
parity x7 x8 x9 = 0
parity x1 x4 x7 = 0
parity x2 x5 x8 = 0
parity x3 x6 x9 = 1
"""
    b = parse_bcs(text)
    assert (b.n, b.m) == (9, 6)
    assert b == magic_square()
    assert serialize_bcs(b) == text


def test_empty_file():
    b = parse_bcs("")
    assert (b.n, b.m) == (0, 0)
    assert parse_bcs("# only a comment\n\n") == b


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_corpus_roundtrip(path):
    b = parse_bcs(read(path))
    text = serialize_bcs(b)
    assert parse_bcs(text) == b
    assert serialize_bcs(parse_bcs(text)) == text


def test_corpus_size():
    assert len(CORPUS) >= 20


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("var x\nclause x y\n", 2, 10),
        ("var x y\nparity x x = 1\n", 2, 10),
        ("var x\nfrobnicate x\n", 2, 1),
        ("var x x\n", 1, 7),
        ("var x\nparity x = 2\n", 2, 12),
        ("domain pm\nvar x\nclause x\n", 3, 1),
        ("var x\nclause x\ndomain 01\n", 3, 1),
        ("var a b\ntable a b : 01,1\n", 2, 16),
    ],
)
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(BcsParseError) as err:
        parse_bcs(text)
    assert err.value.line == line
    assert err.value.column == col


def test_mixed_domain_rejected():
    with pytest.raises(BcsError):
        Bcs(("x",), (ExactlyOne(("x",)),), Domain.BOOLPM)


def test_clause_prefixes():
    b = parse_bcs("var x y\nclause -x +y\n")
    assert b.constraints[0] == Clause((("x", True), ("y", False)))


def test_empty_table_is_falsum():
    b = parse_bcs("var a\ntable a :\n")
    assert b.constraints[0] == Table(("a",), frozenset())
    assert classical_solve_bruteforce(b) is None


# ---------------------------------------------------------------- structure


def test_magic_square_shape():
    b = magic_square()
    assert all(isinstance(c, Parity) and len(c.vars) == 3 for c in b.constraints)
    assert set(b.occurrences().values()) == {2}
    assert [c.parity for c in b.constraints] == [0, 0, 0, 0, 0, 1]


def test_magic_square_unsat():
    assert classical_solve_bruteforce(magic_square()) is None
    assert brute_sat(magic_square()) is None


def test_commutation_pairs_magic_square():
    pairs = commutation_pairs(magic_square())
    assert len(pairs) == 18
    assert frozenset(("x2", "x4")) not in pairs
    assert all(len(p) == 2 for p in pairs)


def test_commutation_pairs_unary():
    assert commutation_pairs(parse_bcs("var x\nclause x\n")) == frozenset()


def test_relations_magic_square():
    rels = to_polynomial_relations(magic_square())
    x = {f"x{i}": NcPoly.var(f"x{i}") for i in range(1, 10)}
    assert x["x1"] * x["x2"] * x["x3"] - 1 in rels
    assert x["x3"] * x["x6"] * x["x9"] + 1 in rels
    for v in x.values():
        assert v * v - 1 in rels


def test_relations_single_free_variable():
    x = NcPoly.var("x")
    assert to_polynomial_relations(parse_bcs("var x\n")) == [x * x - x]


@pytest.mark.parametrize("path", CORPUS[:12], ids=os.path.basename)
def test_relations_self_adjoint_modulo_commutators(path):
    b = parse_bcs(read(path))
    rels = to_polynomial_relations(b)
    comm = [r for r in rels if len(r) == 2 and r.degree == 2 and all(len(w) == 2 and w[0] != w[1] for w in r.terms)]
    # commutators become self-adjoint once multiplied by i
    for r in comm:
        assert (r * I_UNIT).is_self_adjoint()
    system = complete(comm, 4, b.variables)
    for r in rels:
        assert normal_form(r - r.involution(), system).is_zero()


# ---------------------------------------------------------------- games


def test_derive_game_magic_square():
    g = derive_game(magic_square())
    assert len(g.questions_a) == 6 and len(g.questions_b) == 9
    assert len(g.dist) == 18
    assert set(g.dist.values()) == {Fraction(1, 18)}
    assert sum(g.dist.values()) == 1


def test_derive_game_clause_rejections():
    b = parse_bcs("var x y\nclause x y\n")
    g = derive_game(b)
    rejected = [
        (a, bit, s, t)
        for (s, t) in g.dist
        for a in g.answers_a[s]
        for bit in g.answers_b[t]
        if not g.V(a, bit, s, t) and a == (0, 0)
    ]
    assert len(rejected) == 4


def test_derive_game_empty_scope_rejected():
    with pytest.raises(BcsError):
        derive_game(Bcs(("x",), (Table((), frozenset({()})),)))


@pytest.mark.parametrize("path", CORPUS, ids=os.path.basename)
def test_derive_game_probabilities_exact(path):
    b = parse_bcs(read(path))
    if b.m == 0 or any(not c.scope for c in b.constraints):
        pytest.skip("no game for an empty system")
    assert sum(derive_game(b).dist.values(), Fraction(0)) == 1


def test_satisfiable_bcs_game_has_perfect_deterministic_strategy():
    b = parse_bcs("var x y z\nclause x y\nclause -x z\none y z\n")
    sol = brute_sat(b)
    g = derive_game(b)
    for (s, t) in g.dist:
        a = tuple(sol[v] for v in b.constraints[s].scope)
        assert g.V(a, sol[t], s, t) == 1


# ---------------------------------------------------------------- brute force


def test_bruteforce_lexicographic():
    assert classical_solve_bruteforce(parse_bcs("var x y\nclause x y\n")) == {"x": 0, "y": 1}


def test_bruteforce_empty():
    assert classical_solve_bruteforce(parse_bcs("")) == {}


def test_bruteforce_guard():
    b = Bcs(tuple(f"v{i}" for i in range(31)))
    with pytest.raises(BcsError):
        classical_solve_bruteforce(b)


def test_find_satisfying_matches_oracle_on_random_instances():
    rng = random.Random(11)
    for _ in range(300):
        b = random_clause_bcs(rng, rng.randint(1, 6), rng.randint(0, 9))
        got = find_satisfying(b)
        assert got == brute_sat(b)
        if got is not None:
            assert satisfies(b, got)


def test_all_satisfying_counts():
    b = parse_bcs("var a b c\none a b c\n")
    assert [tuple(s.values()) for s in all_satisfying(b)] == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_find_satisfying_respects_pins():
    b = parse_bcs("var a b c\none a b c\n")
    assert find_satisfying(b, {"b": 1}) == {"a": 0, "b": 1, "c": 0}
    assert find_satisfying(b, {"a": 1, "b": 1}) is None


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_bruteforce_solutions_verify(seed):
    rng = random.Random(seed)
    b = random_clause_bcs(rng, rng.randint(1, 5), rng.randint(0, 8))
    sol = classical_solve_bruteforce(b)
    assert (sol is None) == (brute_sat(b) is None)
    if sol is not None:
        assert satisfies(b, sol)


def test_commutation_pairs_symmetric_and_irreflexive():
    for path in CORPUS:
        for p in commutation_pairs(parse_bcs(read(path))):
            assert len(p) == 2
