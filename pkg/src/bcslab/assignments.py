"""Operator assignments: construction and verification.

An assignment maps each variable to an operator, either an exact Pauli word
(``rep="pauli"``) or a dense complex matrix (``rep="dense"``).  Verification
checks the three conditions of a quantum satisfying assignment: constraint
polynomials vanish, each operator is a self-adjoint projector (domain 01) or
involution (domain pm), and operators sharing a constraint commute.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .bcs import Bcs, BcsError, Domain, ExactlyOne, Parity, magic_square, ordered_pairs, parse_bcs, satisfying_tuples, serialize_bcs
from .pauli import PauliWord, commutation_sign, mul, product, tensor, to_dense, I as PAULI_I, X as PAULI_X, Y as PAULI_Y, Z as PAULI_Z

DENSE_VERIFY_LIMIT = 512
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class OperatorAssignment:
    rep: str
    ops: Mapping[str, object]
    n: int = 0
    dim: int = 1

    def __post_init__(self):
        if self.rep == "pauli":
            object.__setattr__(self, "dim", 2 ** self.n)
            for v, w in self.ops.items():
                if not isinstance(w, PauliWord) or w.n != self.n:
                    raise BcsError(f"operator for {v!r} is not an {self.n}-qubit Pauli word")
                if not w.is_hermitian():
                    raise BcsError(f"operator for {v!r} is not Hermitian: {w}")
        elif self.rep == "dense":
            ops = {}
            for v, m in self.ops.items():
                m = np.asarray(m, dtype=complex)
                if m.shape != (self.dim, self.dim):
                    raise BcsError(f"operator for {v!r} has shape {m.shape}, expected {(self.dim, self.dim)}")
                ops[v] = m
            object.__setattr__(self, "ops", ops)
        else:
            raise BcsError(f"unknown representation {self.rep!r}")

    @classmethod
    def pauli(cls, ops: Mapping[str, PauliWord]) -> "OperatorAssignment":
        ns = {w.n for w in ops.values()}
        if len(ns) > 1:
            raise BcsError("Pauli words of different sizes")
        return cls("pauli", dict(ops), n=ns.pop() if ns else 0)

    @classmethod
    def dense(cls, ops: Mapping[str, np.ndarray]) -> "OperatorAssignment":
        dims = {np.asarray(m).shape[0] for m in ops.values()}
        if len(dims) > 1:
            raise BcsError("matrices of different sizes")
        return cls("dense", dict(ops), dim=dims.pop() if dims else 1)

    @classmethod
    def classical(cls, values: Mapping[str, int], domain: Domain = Domain.BOOL01) -> "OperatorAssignment":
        """1x1 matrices from a 0/1 assignment (bit 1 is -1 in domain pm)."""
        if Domain(domain) is Domain.BOOLPM:
            return cls.dense({v: [[(-1) ** b]] for v, b in values.items()})
        return cls.dense({v: [[b]] for v, b in values.items()})

    def to_dense(self) -> "OperatorAssignment":
        if self.rep == "dense":
            return self
        if self.dim > DENSE_VERIFY_LIMIT:
            raise BcsError(f"dimension {self.dim} exceeds dense limit {DENSE_VERIFY_LIMIT}")
        return OperatorAssignment.dense({v: to_dense(w) for v, w in self.ops.items()})

    def matrix(self, v: str) -> np.ndarray:
        w = self.ops[v]
        return to_dense(w) if self.rep == "pauli" else w

    def conjugate_by(self, u: np.ndarray) -> "OperatorAssignment":
        d = self.to_dense()
        return OperatorAssignment.dense({v: u @ m @ u.conj().T for v, m in d.ops.items()})

    def to_json(self) -> dict:
        if self.rep == "pauli":
            return {"rep": "pauli", "n": self.n, "ops": {v: w.label() for v, w in self.ops.items()}}
        return {
            "rep": "dense",
            "dim": self.dim,
            "ops": {v: matrix_to_json(m) for v, m in self.ops.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "OperatorAssignment":
        if data["rep"] == "pauli":
            ops = {v: PauliWord.from_label(s) for v, s in data["ops"].items()}
            for v, w in ops.items():
                if w.n != data["n"]:
                    raise BcsError(f"operator for {v!r} has {w.n} qubits, expected {data['n']}")
            return cls("pauli", ops, n=int(data["n"]))
        if data["rep"] == "dense":
            return cls("dense", {v: matrix_from_json(m) for v, m in data["ops"].items()}, dim=int(data["dim"]))
        raise BcsError(f"unknown representation {data['rep']!r}")


def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


@dataclass(frozen=True)
class VerificationReport:
    condA: Tuple[Tuple[int, float], ...]
    condB: Tuple[Tuple[str, float], ...]
    condC: Tuple[Tuple[Tuple[str, str], float], ...]
    tolerance: float
    passed: bool

    @property
    def pass_(self) -> bool:
        return self.passed

    def __bool__(self):
        return self.passed

    def failures(self) -> List[str]:
        out = [f"constraint {c}: {r:.3g}" for c, r in self.condA if r > self.tolerance]
        out += [f"variable {v}: {r:.3g}" for v, r in self.condB if r > self.tolerance]
        out += [f"pair {p[0]},{p[1]}: {r:.3g}" for p, r in self.condC if r > self.tolerance]
        return out

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "tolerance": self.tolerance,
            "condA": [[c, r] for c, r in self.condA],
            "condB": [[v, r] for v, r in self.condB],
            "condC": [[list(p), r] for p, r in self.condC],
        }


def _opnorm(m: np.ndarray) -> float:
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def _word_distance(w: PauliWord, target: complex) -> float:
    """Operator norm of ``w - target * I`` for a Pauli word."""
    s = w.scalar()
    if s is not None:
        return abs(s - target)
    # eigenvalues of a non-scalar Pauli word are +-i^phase
    lam = (1, 1j, -1, -1j)[w.phase]
    return max(abs(lam - target), abs(-lam - target))


def _symbolic_pm(b: Bcs, a: OperatorAssignment, tol: float) -> VerificationReport:
    ops = a.ops
    cond_b = tuple((v, _word_distance(mul(ops[v], ops[v]), 1)) for v in b.variables)
    cond_c = tuple(((u, v), 0.0 if commutation_sign(ops[u], ops[v]) == 1 else 2.0) for u, v in ordered_pairs(b))
    cond_a = []
    for cid, c in enumerate(b.constraints):
        prod = product((ops[v] for v in c.scope), a.n)
        cond_a.append((cid, _word_distance(prod, -1 if c.parity else 1)))
    residuals = [r for _, r in cond_a] + [r for _, r in cond_b] + [r for _, r in cond_c]
    return VerificationReport(tuple(cond_a), cond_b, cond_c, tol, all(r <= tol for r in residuals))


def constraint_operator(c, ops: Mapping[str, np.ndarray], domain: Domain, eye: np.ndarray) -> np.ndarray:
    """The constraint polynomial evaluated on matrices, in scope order."""
    if domain is Domain.BOOLPM:
        m = eye
        for v in c.scope:
            m = m @ ops[v]
        return m - (-1 if c.parity else 1) * eye
    if isinstance(c, ExactlyOne):
        return sum((ops[v] for v in c.vars), -eye)
    acc = eye.copy()
    for t in satisfying_tuples(c):
        m = eye
        for v, bit in zip(c.scope, t):
            m = m @ (ops[v] if bit else eye - ops[v])
        acc = acc - m
    return acc


def verify_assignment(b: Bcs, a: OperatorAssignment, tol: float = DEFAULT_TOL) -> VerificationReport:
    missing = [v for v in b.variables if v not in a.ops]
    if missing:
        raise BcsError(f"assignment misses variables {missing}")
    if a.rep == "pauli" and b.domain is Domain.BOOLPM:
        return _symbolic_pm(b, a, tol)
    if a.dim > DENSE_VERIFY_LIMIT:
        raise BcsError(f"dimension {a.dim} exceeds dense limit {DENSE_VERIFY_LIMIT}")
    d = a.to_dense()
    ops = d.ops
    eye = np.eye(d.dim, dtype=complex)
    cond_b = []
    for v in b.variables:
        m = ops[v]
        herm = _opnorm(m - m.conj().T)
        sq = _opnorm(m @ m - (eye if b.domain is Domain.BOOLPM else m))
        cond_b.append((v, max(herm, sq)))
    cond_c = [((u, v), _opnorm(ops[u] @ ops[v] - ops[v] @ ops[u])) for u, v in ordered_pairs(b)]
    cond_a = [(cid, _opnorm(constraint_operator(c, ops, b.domain, eye))) for cid, c in enumerate(b.constraints)]
    residuals = [r for _, r in cond_a] + [r for _, r in cond_b] + [r for _, r in cond_c]
    return VerificationReport(tuple(cond_a), tuple(cond_b), tuple(cond_c), tol, all(r <= tol for r in residuals))


# ---------------------------------------------------------------------------
# constructions


def _w(label: str) -> PauliWord:
    return PauliWord.from_label(label)


def mermin_peres_assignment() -> OperatorAssignment:
    """Two-qubit Pauli solution of :func:`magic_square`, positions 1..9 row by row."""
    labels = ["XI", "IZ", "XZ", "IX", "ZI", "ZX", "XX", "ZZ", "-YY"]
    return OperatorAssignment.pauli({f"x{j}": _w(s) for j, s in enumerate(labels, start=1)})


MAX_CLIFFORD_RANK = 24


def clifford_generators(N: int) -> List[PauliWord]:
    """N pairwise anticommuting Hermitian involutions on floor(N/2) qubits (Jordan-Wigner)."""
    if not 1 <= N <= MAX_CLIFFORD_RANK:
        raise ValueError(f"rank must be in 1..{MAX_CLIFFORD_RANK}")
    m = N // 2
    gens = []
    for k in range(m):
        prefix = "Z" * k
        suffix = "I" * (m - k - 1)
        gens.append(_w(prefix + "X" + suffix))
        gens.append(_w(prefix + "Y" + suffix))
    if N % 2:
        last = product(gens, m)
        if not last.is_hermitian():
            last = last.times_i()
        gens.append(last)
    return gens


def extend_anticommuting_pair(A: PauliWord, B: PauliWord) -> List[PauliWord]:
    """Magic-square solution on 1+n qubits with position 2 = I(x)A and position 4 = I(x)B."""
    if A.n != B.n:
        raise ValueError("A and B act on different numbers of qubits")
    if not (A.is_hermitian() and B.is_hermitian()):
        raise ValueError("A and B must be Hermitian")
    if commutation_sign(A, B) != -1:
        raise ValueError("A and B must anticommute")
    C = mul(A, B).times_i()
    one = PauliWord.identity(A.n)
    grid = [
        (PAULI_X, one), (PAULI_I, A), (PAULI_X, A),
        (PAULI_I, B), (PAULI_Z, one), (PAULI_Z, B),
        (PAULI_X, B), (PAULI_Z, A), (PAULI_Y, C),
    ]
    return [tensor(p, q) for p, q in grid]


MAX_CLIFFORD_BCS_RANK = 12
# magic-square positions (1-based) taken by the seven edge variables
EDGE_POSITIONS = (1, 3, 5, 6, 7, 8, 9)


def edge_variables(j: int, k: int) -> List[str]:
    return [f"y{j}_{k}_{i}" for i in range(1, 8)]


def clifford_bcs(N: int) -> Tuple[Bcs, OperatorAssignment]:
    """Magic squares glued over the complete graph K_N, with a Pauli solution."""
    if not 2 <= N <= MAX_CLIFFORD_BCS_RANK:
        raise ValueError(f"rank must be in 2..{MAX_CLIFFORD_BCS_RANK}")
    gens = clifford_generators(N)
    one = PauliWord.identity(1)
    xs = [f"x{j}" for j in range(1, N + 1)]
    variables = list(xs)
    ops = {x: tensor(one, g) for x, g in zip(xs, gens)}
    ms = magic_square()
    constraints = []
    for j, k in itertools.combinations(range(1, N + 1), 2):
        ys = edge_variables(j, k)
        variables += ys
        slot = {2: f"x{j}", 4: f"x{k}"}
        slot.update(zip(EDGE_POSITIONS, ys))
        rename = {f"x{p}": name for p, name in slot.items()}
        for c in ms.constraints:
            constraints.append(Parity(tuple(rename[v] for v in c.vars), c.parity))
        square = extend_anticommuting_pair(gens[j - 1], gens[k - 1])
        for p, y in zip(EDGE_POSITIONS, ys):
            ops[y] = square[p - 1]
    b = Bcs(tuple(variables), tuple(constraints), Domain.BOOLPM)
    return b, OperatorAssignment.pauli(ops)


def clifford_counts(N: int) -> Tuple[int, int]:
    """Expected (variables, constraints) of :func:`clifford_bcs`."""
    return N + 7 * comb(N, 2), 6 * comb(N, 2)


# ---------------------------------------------------------------------------
# bundle format: an assignment optionally carrying its BCS


def assignment_bundle(b: Optional[Bcs], a: OperatorAssignment) -> dict:
    data = a.to_json()
    if b is not None:
        data["bcs"] = serialize_bcs(b)
    return data


def load_bundle(data: dict) -> Tuple[Optional[Bcs], OperatorAssignment]:
    b = parse_bcs(data["bcs"]) if "bcs" in data else None
    return b, OperatorAssignment.from_json(data)
