import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bcslab.bcs import Bcs, BcsError, ExactlyOne, magic_square, parse_bcs, to_polynomial_relations
from bcslab.ncpoly import I_UNIT, NcPoly, gaussian
from bcslab.reductions import onein3_gadget, prism_gadget, triangle_bcs
from bcslab.rewrite import (
    Certificate,
    Inconclusive,
    ProofTrace,
    certify_gadget,
    certify_targets,
    check_extendibility,
    complete,
    involution,
    normal_form,
    prove_membership,
)

x, y = NcPoly.var("x"), NcPoly.var("y")


def var(name):
    return NcPoly.var(name)


def irreducible_words(system, names, max_len):
    leads = [w for w, _ in system.rules]
    out = []
    for k in range(max_len + 1):
        for w in itertools.product(names, repeat=k):
            if not any(any(w[i:i + len(l)] == l for i in range(len(w) - len(l) + 1)) for l in leads):
                out.append(w)
    return out


def commuting_involutions(n):
    vs = [f"x{i}" for i in range(n)]
    rels = [var(v) * var(v) - 1 for v in vs]
    rels += [var(a) * var(b) - var(b) * var(a) for a, b in itertools.combinations(vs, 2)]
    return vs, rels


# ---------------------------------------------------------------- involution


def test_involution_examples():
    x1, x2 = var("x1"), var("x2")
    c = x1 * x2 - x2 * x1
    assert involution(c) == x2 * x1 - x1 * x2
    assert involution(c * I_UNIT) == c * I_UNIT
    assert involution(NcPoly.const(gaussian(1, -2))) == NcPoly.const(gaussian(1, 2))


# ---------------------------------------------------------------- normal forms


def test_idempotent_rule():
    s = complete([x * x - x], 4)
    assert normal_form(x * x, s) == x
    assert normal_form(x ** 5, s) == x


def test_single_relation_is_its_own_system():
    s = complete([x * x - x], 8)
    assert s.rules == [(("x", "x"), x)]


def test_magic_square_row_rule():
    x1, x2, x3 = var("x1"), var("x2"), var("x3")
    s = complete([x1 * x2 * x3 - 1], 3)
    assert normal_form(x1 * x2 * x3, s) == NcPoly.const(1)


def test_two_commuting_involutions_quotient():
    s = complete([x * x - 1, y * y - 1, x * y - y * x], 6, ["x", "y"])
    words = irreducible_words(s, ["x", "y"], 5)
    # enumerated quotient basis: 1, x, y, xy
    assert sorted(words) == sorted([(), ("x",), ("y",), ("x", "y")])
    assert normal_form(y * x * y * x * x, s) == x


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_commuting_involutions_have_2n_irreducible_words(n):
    vs, rels = commuting_involutions(n)
    s = complete(rels, 4, vs)
    assert len(irreducible_words(s, vs, n + 2)) == 2 ** n


def test_normal_form_idempotent_on_magic_square():
    rels = to_polynomial_relations(magic_square())
    s = complete(rels, 6, magic_square().variables)
    p = var("x9") * var("x5") * var("x1") + var("x3") * var("x2") * I_UNIT - var("x7") * var("x7")
    once = normal_form(p, s)
    assert normal_form(once, s) == once


def test_rules_are_monic_and_oriented():
    rels = to_polynomial_relations(magic_square())
    s = complete(rels, 6, magic_square().variables)
    rank = {v: i for i, v in enumerate(magic_square().variables)}
    key = lambda w: (len(w), tuple(rank[v] for v in w))
    for lead, rem in s.rules:
        assert all(key(w) < key(lead) for w in rem.terms)
    for rid in s.rule_ids():
        poly = s.rule_polynomial(rid)
        top = max(poly.terms, key=key)
        assert poly.terms[top] == 1


def test_rules_are_interreduced():
    rels = to_polynomial_relations(magic_square())
    s = complete(rels, 6, magic_square().variables)
    for lead, rem in s.rules:
        assert normal_form(rem, s) == rem


def test_undeclared_variables_keep_distinct_ranks():
    s = complete([x * x - x], 4, ["x"])
    p = var("a") * var("b") - var("b") * var("a")
    assert normal_form(p, s) == p
    assert normal_form(var("b") * x * x, s) == var("b") * x


names3 = st.sampled_from(["x0", "x1", "x2"])
small_polys = st.dictionaries(
    st.lists(names3, max_size=3).map(tuple),
    st.sampled_from([Fraction(1), Fraction(-2), Fraction(1, 3), I_UNIT]),
    max_size=4,
).map(NcPoly)


@settings(max_examples=80, deadline=None)
@given(small_polys, small_polys)
def test_normal_form_is_a_congruence(p, q):
    vs, rels = commuting_involutions(3)
    s = complete(rels, 4, vs)
    assert normal_form(p * q, s) == normal_form(normal_form(p, s) * normal_form(q, s), s)
    assert normal_form(p + q, s) == normal_form(p, s) + normal_form(q, s)


@settings(max_examples=40, deadline=None)
@given(small_polys)
def test_normal_form_agrees_with_matrix_model(p):
    # x0, x1, x2 as commuting diagonal +-1 matrices: a faithful model of the quotient
    diag = [np.diag([(-1) ** ((k >> j) & 1) for k in range(8)]).astype(complex) for j in range(3)]
    ops = dict(zip(["x0", "x1", "x2"], diag))
    vs, rels = commuting_involutions(3)
    s = complete(rels, 4, vs)
    nf = normal_form(p, s)
    assert np.allclose(p.evaluate(ops, np.eye(8)), nf.evaluate(ops, np.eye(8)))
    assert nf.degree <= 3


# ---------------------------------------------------------------- membership


def test_prove_zero():
    t = prove_membership(NcPoly(), [x * x - x])
    assert isinstance(t, ProofTrace)
    assert t.combination == ()
    assert t.verify()


@pytest.mark.parametrize("D", [2, 4, 8])
def test_idempotent_generator_not_provable(D):
    x1 = var("x1")
    res = prove_membership(x1, [x1 * x1 - x1], D)
    assert isinstance(res, Inconclusive)
    assert not res
    assert res.degree == D
    # oracle: x1 = 1 satisfies the relation but not the target
    one = {"x1": np.eye(1)}
    assert np.allclose((x1 * x1 - x1).evaluate(one, np.eye(1)), 0)
    assert not np.allclose(x1.evaluate(one, np.eye(1)), 0)


def test_magic_square_anticommutation_proof():
    rels = to_polynomial_relations(magic_square())
    target = var("x2") * var("x4") + var("x4") * var("x2")
    t = prove_membership(target, rels, 6, magic_square().variables)
    assert isinstance(t, ProofTrace)
    assert t.verify()
    assert t.replay() == target
    flat = t.flatten()
    assert flat.lemmas == ()
    assert all(0 <= idx < len(rels) for _, idx, _, _ in flat.combination)
    assert flat.verify()


def test_trace_json_roundtrip():
    rels = to_polynomial_relations(magic_square())
    t = prove_membership(var("x2") * var("x4") + var("x4") * var("x2"), rels, 6, magic_square().variables)
    back = ProofTrace.from_json(json.loads(json.dumps(t.to_json())), rels)
    assert back == t
    assert back.verify()


def test_every_rule_has_a_proof():
    rels = to_polynomial_relations(onein3_gadget())
    s = complete(rels, 6, onein3_gadget().variables)
    for rid in s.rule_ids():
        tr = s.trace_of_rule(rid)
        assert tr.verify()
        assert tr.target == s.rule_polynomial(rid)


def test_forward_lemma_reference_rejected():
    rels = (x * x - x,)
    lemma = (x * x - x, ((("x",), 1, (), Fraction(1)),))
    t = ProofTrace(x * x - x, rels, (((), 1, (), Fraction(1)),), (lemma,))
    assert not t.verify()


# ---------------------------------------------------------------- gadgets


def test_prism_certificate():
    cert = certify_gadget(prism_gadget(), ("a", "e"), "commute", 8)
    assert isinstance(cert, Certificate)
    assert len(cert.proofs) == 9
    targets = {p.target for p in cert.proofs}
    for al in range(3):
        for be in range(3):
            u, v = var(f"a_{al}"), var(f"e_{be}")
            assert u * v - v * u in targets
    assert cert.verify()


def test_onein3_certificate():
    cert = certify_gadget(onein3_gadget(), ("x", "y"), "commute", 6)
    assert isinstance(cert, Certificate) and cert.verify()
    assert cert.proofs[0].target == var("x") * var("y") - var("y") * var("x")


def test_magic_square_certificate():
    cert = certify_gadget(magic_square(), ("x2", "x4"), "anticommute", 6)
    assert isinstance(cert, Certificate) and cert.verify()


def test_triangle_lemmas():
    g = triangle_bcs()
    targets = []
    for p, q in (("u", "v"), ("v", "w"), ("u", "w")):
        for al in range(3):
            for be in range(3):
                a, b = var(f"{p}_{al}"), var(f"{q}_{be}")
                targets.append(a * b - b * a)
    for al in range(3):
        targets.append(var(f"u_{al}") + var(f"v_{al}") + var(f"w_{al}") - 1)
    cert = certify_targets(g, targets, 8)
    assert isinstance(cert, Certificate) and cert.verify()
    assert len(cert.proofs) == 30


def test_certificate_json_roundtrip_and_tamper():
    cert = certify_gadget(onein3_gadget(), ("x", "y"), "commute", 6)
    data = json.loads(json.dumps(cert.to_json()))
    assert Certificate.from_json(data) == cert
    assert Certificate.from_json(data).verify()
    combo = data["proofs"][0]["combination"]
    combo[0][3] = "(7+0i)" if combo[0][3] != "(7+0i)" else "(5+0i)"
    assert not Certificate.from_json(data).verify()


def test_certificate_unknown_variable():
    with pytest.raises(BcsError):
        certify_gadget(onein3_gadget(), ("x", "nope"), "commute", 4)
    with pytest.raises(ValueError):
        certify_gadget(onein3_gadget(), ("x", "y"), "sideways", 4)


def test_low_cap_is_inconclusive_not_error():
    res = certify_gadget(prism_gadget(), ("a", "e"), "commute", 2)
    assert isinstance(res, Inconclusive)


# ---------------------------------------------------------------- extendibility


def test_prism_extendibility():
    assert check_extendibility(prism_gadget(), ["a", "e"])


def test_onein3_extendibility():
    assert check_extendibility(onein3_gadget(), ["x", "y"])


def test_exactly_one_singleton_not_extendible():
    assert not check_extendibility(Bcs(("x",), (ExactlyOne(("x",)),)), ["x"])


def test_extendibility_guard():
    b = Bcs(tuple(f"v{i}" for i in range(25)))
    with pytest.raises(BcsError):
        check_extendibility(b, ["v0"])


def test_adjacent_boundary_not_extendible():
    # u and v share an edge, so the boundary colouring u = v = 0 cannot extend
    assert not check_extendibility(triangle_bcs(), ["u", "v"])
    assert check_extendibility(triangle_bcs(), ["u"])
