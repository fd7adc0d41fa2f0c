"""Quantum strategies for nonlocal games and their winning probability."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .assignments import OperatorAssignment, matrix_from_json, matrix_to_json, verify_assignment
from .bcs import Bcs, BcsError, Domain, GameSpec

EIGEN_TOL = 1e-8
PVM_TOL = 1e-10

Pvm = List[Tuple[object, np.ndarray]]


def maximally_entangled(d: int) -> np.ndarray:
    """Amplitude table of sum_j |jj>/sqrt(d)."""
    return np.eye(d, dtype=complex) / np.sqrt(d)


@dataclass(frozen=True)
class Strategy:
    """Shared state ``sum_ij state[i, j] |i>|j>`` and one PVM per question."""

    dim: int
    state: np.ndarray
    alice: Dict[object, Pvm]
    bob: Dict[object, Pvm]

    def pvm_defect(self) -> float:
        """Largest deviation from a valid PVM over all questions, in operator norm."""
        eye = np.eye(self.dim)
        worst = 0.0
        for pvms in (self.alice, self.bob):
            for pvm in pvms.values():
                total = sum((p for _, p in pvm), np.zeros((self.dim, self.dim), dtype=complex))
                worst = max(worst, np.linalg.norm(total - eye, 2))
                for _, p in pvm:
                    worst = max(worst, np.linalg.norm(p - p.conj().T, 2), np.linalg.norm(p @ p - p, 2))
        return float(worst)

    def to_json(self) -> dict:
        def pvms(table):
            return [[_jsonable(q), [[_jsonable(a), matrix_to_json(p)] for a, p in pvm]] for q, pvm in table.items()]

        return {"dim": self.dim, "state": matrix_to_json(self.state), "alice": pvms(self.alice), "bob": pvms(self.bob)}

    @classmethod
    def from_json(cls, data: dict) -> "Strategy":
        def pvms(items):
            return {_hashable(q): [(_hashable(a), matrix_from_json(p)) for a, p in pvm] for q, pvm in items}

        return cls(int(data["dim"]), matrix_from_json(data["state"]), pvms(data["alice"]), pvms(data["bob"]))


def _jsonable(x):
    if isinstance(x, tuple):
        return [_jsonable(v) for v in x]
    return x


def _hashable(x):
    if isinstance(x, list):
        return tuple(_hashable(v) for v in x)
    return x


def _spectrum(domain: Domain):
    # (eigenvalue, answer bit)
    return ((1.0, 0), (-1.0, 1)) if domain is Domain.BOOLPM else ((0.0, 0), (1.0, 1))


def _split(basis: np.ndarray, op: np.ndarray, spectrum) -> List[Tuple[int, np.ndarray]]:
    """Split span(basis) into eigenspaces of ``op`` (which must preserve it)."""
    if basis.shape[1] == 0:
        return []
    local = basis.conj().T @ op @ basis
    local = (local + local.conj().T) / 2
    vals, vecs = np.linalg.eigh(local)
    out = []
    used = np.zeros(len(vals), dtype=bool)
    for lam, bit in spectrum:
        sel = np.abs(vals - lam) <= EIGEN_TOL
        used |= sel
        if sel.any():
            out.append((bit, basis @ vecs[:, sel]))
    if not used.all():
        bad = vals[~used]
        raise BcsError(f"eigenvalue {bad[0]:.6g} outside the allowed spectrum")
    return out


def joint_pvm(ops: Sequence[np.ndarray], domain: Domain, dim: int) -> Pvm:
    """Joint eigenprojectors of commuting operators labelled by answer bit tuples."""
    spectrum = _spectrum(domain)
    parts = [((), np.eye(dim, dtype=complex))]
    for op in ops:
        parts = [(label + (bit,), v) for label, basis in parts for bit, v in _split(basis, op, spectrum)]
    return [(label, v @ v.conj().T) for label, v in parts]


def strategy_from_assignment(b: Bcs, a: OperatorAssignment, tol: float = 1e-9) -> Strategy:
    d = a.to_dense()
    for c in b.constraints:
        scope = c.scope
        for i, u in enumerate(scope):
            for v in scope[i + 1:]:
                x, y = d.ops[u], d.ops[v]
                if np.linalg.norm(x @ y - y @ x, 2) > tol:
                    raise BcsError(f"scope operators {u} and {v} do not commute")
    report = verify_assignment(b, d, tol)
    if not report.passed:
        raise BcsError("assignment does not verify: " + "; ".join(report.failures()))
    alice = {s: joint_pvm([d.ops[v] for v in c.scope], b.domain, d.dim) for s, c in enumerate(b.constraints)}
    bob = {}
    for t in b.variables:
        bob[t] = [(lab[0], p) for lab, p in joint_pvm([d.ops[t].conj()], b.domain, d.dim)]
    return Strategy(d.dim, maximally_entangled(d.dim), alice, bob)


def correlation(state: np.ndarray, a: np.ndarray, b: np.ndarray) -> complex:
    """<psi| a (x) b |psi> for the amplitude table of psi."""
    return np.trace(state.conj().T @ a @ state @ b.T)


def game_value(g: GameSpec, s: Strategy) -> float:
    if s.state.shape != (s.dim, s.dim):
        raise BcsError("state does not match strategy dimension")
    total = 0.0
    for (qa, qb), p in g.dist.items():
        if qa not in s.alice or qb not in s.bob:
            raise BcsError(f"strategy has no measurement for question pair {(qa, qb)!r}")
        wins = g.wins[(qa, qb)]
        for ans_a, pa in s.alice[qa]:
            if ans_a not in g.answers_a[qa]:
                raise BcsError(f"answer {ans_a!r} not allowed for question {qa!r}")
            if pa.shape != (s.dim, s.dim):
                raise BcsError("projector dimension mismatch")
            for ans_b, pb in s.bob[qb]:
                if ans_b not in g.answers_b[qb]:
                    raise BcsError(f"answer {ans_b!r} not allowed for question {qb!r}")
                if (ans_a, ans_b) in wins:
                    total += float(p) * correlation(s.state, pa, pb).real
    return total


def disagreement(b: Bcs, s: Strategy) -> float:
    """Largest probability, over supported (s, t), that Bob's bit differs from Alice's bit for t."""
    worst = 0.0
    for cid, c in enumerate(b.constraints):
        for k, t in enumerate(c.scope):
            prob = 0.0
            for ans_a, pa in s.alice[cid]:
                for bit, pb in s.bob[t]:
                    if ans_a[k] != bit:
                        prob += correlation(s.state, pa, pb).real
            worst = max(worst, prob)
    return worst


def chsh_game() -> GameSpec:
    qs = (0, 1)
    dist = {(x, y): Fraction(1, 4) for x in qs for y in qs}
    wins = {(x, y): frozenset((a, b) for a in (0, 1) for b in (0, 1) if a ^ b == x & y) for x, y in dist}
    return GameSpec(qs, qs, {0: (0, 1), 1: (0, 1)}, {0: (0, 1), 1: (0, 1)}, dist, wins)


def _observable_pvm(obs: np.ndarray) -> Pvm:
    eye = np.eye(obs.shape[0], dtype=complex)
    return [(0, (eye + obs) / 2), (1, (eye - obs) / 2)]


def chsh_optimal_strategy() -> Strategy:
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    r = 1 / np.sqrt(2)
    alice = {0: _observable_pvm(z), 1: _observable_pvm(x)}
    bob = {0: _observable_pvm(r * (z + x)), 1: _observable_pvm(r * (z - x))}
    return Strategy(2, maximally_entangled(2), alice, bob)


def game_to_json(g: GameSpec) -> dict:
    return {
        "questions_a": [_jsonable(q) for q in g.questions_a],
        "questions_b": [_jsonable(q) for q in g.questions_b],
        "answers_a": [[_jsonable(s), [_jsonable(a) for a in g.answers_a[s]]] for s in g.questions_a],
        "answers_b": [[_jsonable(t), [_jsonable(b) for b in g.answers_b[t]]] for t in g.questions_b],
        "dist": [[_jsonable(s), _jsonable(t), str(p)] for (s, t), p in g.dist.items()],
        "wins": [
            [_jsonable(s), _jsonable(t), sorted([_jsonable(a), _jsonable(b)] for a, b in w)]
            for (s, t), w in g.wins.items()
        ],
    }


def game_from_json(data: dict) -> GameSpec:
    h = _hashable
    return GameSpec(
        questions_a=tuple(h(q) for q in data["questions_a"]),
        questions_b=tuple(h(q) for q in data["questions_b"]),
        answers_a={h(s): tuple(h(a) for a in ans) for s, ans in data["answers_a"]},
        answers_b={h(t): tuple(h(b) for b in ans) for t, ans in data["answers_b"]},
        dist={(h(s), h(t)): Fraction(p) for s, t, p in data["dist"]},
        wins={(h(s), h(t)): frozenset((h(a), h(b)) for a, b in w) for s, t, w in data["wins"]},
    )
