"""Named operators: Paulis, Pauli words, and su(N) bases.

Pauli words are lowercase strings over ``"ixyz"``; site 1 is the leftmost
tensor factor.  Indices of unit matrices and Chevalley generators are
1-based, as in the physics notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from math import comb

import numpy as np

PAULI = {
    "i": np.eye(2, dtype=np.complex128),
    "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

LETTERS = "xyz"

# k = +1 -> x_j, 0 -> h_j, -1 -> y_j
GRADES = (1, 0, -1)


def normalize_word(word, *, allow_identity=True) -> str:
    if not isinstance(word, str) or not word:
        raise ValueError(f"invalid Pauli word {word!r}")
    w = word.lower()
    alphabet = "ixyz" if allow_identity else "xyz"
    for ch in w:
        if ch not in alphabet:
            if ch == "i":
                raise ValueError(f"word {word!r} contains 'i'")
            raise ValueError(f"word {word!r} contains invalid letter {ch!r}")
    return w


def z_count(word: str) -> int:
    return word.count("z")


def unit_matrix(n: int, i: int, j: int) -> np.ndarray:
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"unit matrix index ({i}, {j}) out of range for n={n}")
    e = np.zeros((n, n), dtype=np.complex128)
    e[i - 1, j - 1] = 1.0
    return e


@dataclass(frozen=True)
class ChevalleySet:
    """Chevalley generators of su(n): ``h[j-1]``, ``x[j-1]``, ``y[j-1]`` for j = 1..n-1."""

    n: int
    h: tuple
    x: tuple
    y: tuple

    def s(self, j: int, k: int) -> np.ndarray:
        """The grade-``k`` generator attached to simple root ``j``."""
        if not 1 <= j <= self.n - 1:
            raise IndexError(f"root index {j} out of range for n={self.n}")
        if k == 1:
            return self.x[j - 1]
        if k == 0:
            return self.h[j - 1]
        if k == -1:
            return self.y[j - 1]
        raise ValueError(f"grade must be -1, 0 or +1, got {k!r}")

    def all(self) -> list:
        return [*self.h, *self.x, *self.y]


@lru_cache(maxsize=None)
def chevalley(n: int) -> ChevalleySet:
    """Chevalley basis of su(n).

    ``h_j = e_jj - e_{j+1,j+1}``, ``x_j = e_{j,j+1} + e_{j+1,j}`` and
    ``y_j = i(e_{j,j+1} - e_{j+1,j})``.  For n = 2 this gives
    ``(sigma_z, sigma_x, -sigma_y)``.
    """
    if n < 2:
        raise ValueError(f"su(n) needs n >= 2, got {n}")
    h, x, y = [], [], []
    for j in range(1, n):
        e_up, e_dn = unit_matrix(n, j, j + 1), unit_matrix(n, j + 1, j)
        h.append(unit_matrix(n, j, j) - unit_matrix(n, j + 1, j + 1))
        x.append(e_up + e_dn)
        y.append(1j * (e_up - e_dn))
    for m in (*h, *x, *y):
        m.setflags(write=False)
    return ChevalleySet(n, tuple(h), tuple(x), tuple(y))


def cartan_su_basis(n: int) -> list:
    """All ``n**2 - 1`` Hermitian traceless basis matrices of su(n).

    Off-diagonal pairs ``e_jk + e_kj`` and ``i(e_jk - e_kj)`` for j < k in
    row-major order, followed by the Cartan generators ``h_1..h_{n-1}``.
    """
    if n < 2:
        raise ValueError(f"su(n) needs n >= 2, got {n}")
    out = []
    for j in range(1, n + 1):
        for k in range(j + 1, n + 1):
            e_jk, e_kj = unit_matrix(n, j, k), unit_matrix(n, k, j)
            out.append(e_jk + e_kj)
            out.append(1j * (e_jk - e_kj))
    out.extend(chevalley(n).h)
    return [np.array(m) for m in out]


@lru_cache(maxsize=256)
def _word_matrix(word: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=np.complex128)
    for ch in word:
        out = np.kron(out, PAULI[ch])
    out.setflags(write=False)
    return out


def pauli_word_matrix(word: str) -> np.ndarray:
    """Tensor product of the site letters, site 1 leftmost."""
    return _word_matrix(normalize_word(word))


def site_word(m: int, site: int, letter: str) -> str:
    """Word with ``letter`` at ``site`` (1-based) and identity elsewhere."""
    if not 1 <= site <= m:
        raise IndexError(f"site {site} out of range for a chain of {m} qubits")
    return "i" * (site - 1) + letter + "i" * (m - site)


def enumerate_words(m: int, alphabet: str = LETTERS, z_letters: int | None = None) -> list:
    """All words of length ``m`` over ``alphabet`` in lexicographic order.

    With ``z_letters`` given, only words with exactly that many ``z`` are
    returned.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    alphabet = "".join(sorted(set(alphabet.lower())))
    if not alphabet or any(ch not in "ixyz" for ch in alphabet):
        raise ValueError(f"invalid alphabet {alphabet!r}")
    words = ["".join(p) for p in product(alphabet, repeat=m)]
    if z_letters is not None:
        words = [w for w in words if w.count("z") == z_letters]
    return words


def layer_size(m: int, n_z: int) -> int:
    """Number of x/y/z words of length ``m`` with exactly ``n_z`` z letters."""
    return comb(m, n_z) * 2 ** (m - n_z)


def embed_system(a, m: int) -> np.ndarray:
    """``a (x) 1`` on a chain of ``m`` qubits."""
    return np.kron(a, np.eye(2**m, dtype=np.complex128))


def embed_accessor(n: int, b) -> np.ndarray:
    """``1_n (x) b``."""
    return np.kron(np.eye(n, dtype=np.complex128), b)


def local_op(n: int, m: int, site: int, letter: str) -> np.ndarray:
    """``1_n (x) sigma_letter`` acting on accessor ``site``."""
    return embed_accessor(n, pauli_word_matrix(site_word(m, site, letter)))
