"""Exact n-qubit Pauli words in the phase + symplectic representation.

A word is ``i**phase * s_0 (x) s_1 (x) ... (x) s_{n-1}`` where the letter on
qubit k is I, X, Z or Y according to ``(x_k, z_k)`` = (0,0), (1,0), (0,1),
(1,1) and Y is the Hermitian Pauli matrix.  With this convention a word is
Hermitian exactly when ``phase`` is even.  Bit vectors are Python ints;
bit k is qubit k and qubit 0 is the leftmost tensor factor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

DENSE_LIMIT = 12

_LETTER = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _LETTER.items()}
_PREFIX = {0: "", 1: "i*", 2: "-", 3: "-i*"}
_IPOW = (1, 1j, -1, -1j)
_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliWord:
    n: int
    phase: int
    x: int
    z: int

    def __post_init__(self):
        object.__setattr__(self, "phase", self.phase % 4)
        limit = 1 << self.n
        if self.n < 0 or not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError("bit vectors do not fit the qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliWord":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliWord":
        """Parse ``-i*XZ.IY`` style text; ``.`` and spaces are ignored."""
        text = re.sub(r"\s+", "", label)
        m = re.fullmatch(r"([+-]?)(i\*?)?([IXYZ.]*)", text)
        if not m:
            raise ValueError(f"bad Pauli label {label!r}")
        phase = (2 if m.group(1) == "-" else 0) + (1 if m.group(2) else 0)
        letters = m.group(3).replace(".", "")
        x = z = 0
        for k, ch in enumerate(letters):
            xb, zb = _BITS[ch]
            x |= xb << k
            z |= zb << k
        return cls(len(letters), phase, x, z)

    @property
    def xbits(self) -> tuple:
        return tuple((self.x >> k) & 1 for k in range(self.n))

    @property
    def zbits(self) -> tuple:
        return tuple((self.z >> k) & 1 for k in range(self.n))

    @property
    def letters(self) -> str:
        return "".join(_LETTER[(self.x >> k) & 1, (self.z >> k) & 1] for k in range(self.n))

    def label(self) -> str:
        return _PREFIX[self.phase] + self.letters

    def __str__(self):
        return self.label()

    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def scalar(self) -> complex | None:
        """The scalar this word equals, if it is proportional to the identity."""
        if not self.is_identity():
            return None
        return _IPOW[self.phase]

    def __mul__(self, other: "PauliWord") -> "PauliWord":
        return mul(self, other)

    def __neg__(self) -> "PauliWord":
        return PauliWord(self.n, self.phase + 2, self.x, self.z)

    def times_i(self, k: int = 1) -> "PauliWord":
        return PauliWord(self.n, self.phase + k, self.x, self.z)

    def adjoint(self) -> "PauliWord":
        return PauliWord(self.n, -self.phase, self.x, self.z)

    def to_dense(self) -> np.ndarray:
        return to_dense(self)


def mul(p: PauliWord, q: PauliWord) -> PauliWord:
    """Exact product ``p q``."""
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n} qubits")
    # Y = i X Z: move to the X^x Z^z convention, multiply, move back
    ph = p.phase + _popcount(p.x & p.z) + q.phase + _popcount(q.x & q.z)
    ph += 2 * _popcount(p.z & q.x)
    x, z = p.x ^ q.x, p.z ^ q.z
    return PauliWord(p.n, ph - _popcount(x & z), x, z)


def commutation_sign(p: PauliWord, q: PauliWord) -> int:
    if p.n != q.n:
        raise ValueError(f"size mismatch: {p.n} vs {q.n} qubits")
    return -1 if (_popcount(p.x & q.z) + _popcount(q.x & p.z)) % 2 else 1


def tensor(p: PauliWord, q: PauliWord) -> PauliWord:
    """``p (x) q`` with p on the leading qubits."""
    return PauliWord(p.n + q.n, p.phase + q.phase, p.x | (q.x << p.n), p.z | (q.z << p.n))


def tensor_all(words: Iterable[PauliWord]) -> PauliWord:
    out = PauliWord.identity(0)
    for w in words:
        out = tensor(out, w)
    return out


def to_dense(p: PauliWord) -> np.ndarray:
    if p.n > DENSE_LIMIT:
        raise ValueError(f"dense conversion limited to {DENSE_LIMIT} qubits, got {p.n}")
    m = np.ones((1, 1), dtype=complex)
    for ch in p.letters:
        m = np.kron(m, _SINGLE[ch])
    return _IPOW[p.phase] * m


def product(words: Iterable[PauliWord], n: int) -> PauliWord:
    out = PauliWord.identity(n)
    for w in words:
        out = mul(out, w)
    return out


I, X, Y, Z = (PauliWord.from_label(c) for c in "IXYZ")
