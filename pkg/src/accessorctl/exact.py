"""Exact rational cross-check of the floating-point closure.

Operators are ``i * sum_r c_r T_r`` with rational ``c_r`` over the Hermitian
product basis ``T_(a, w) = S_a (x) P_w``: ``S_a`` runs over the u(n) basis
(diagonal units ``e_jj``, then ``e_jk + e_kj`` and ``i(e_jk - e_kj)`` for
j < k) and ``P_w`` over all ``4**m`` Pauli words.  Every structure constant
in this basis is a rational multiple of a power of i, so commutators and
ranks are computed without rounding.
"""
from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product

import numpy as np

from .model import ControlModel

# Pauli letters 0..3 = I, X, Y, Z; _LETTER_PRODUCT[a][b] = (phase power p, c): P_a P_b = i^p P_c
_LETTER_PRODUCT = [[(0, 0)] * 4 for _ in range(4)]
for _a in range(4):
    _LETTER_PRODUCT[0][_a] = (0, _a)
    _LETTER_PRODUCT[_a][0] = (0, _a)
    _LETTER_PRODUCT[_a][_a] = (0, 0)
for _a, _b, _c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
    _LETTER_PRODUCT[_a][_b] = (1, _c)
    _LETTER_PRODUCT[_b][_a] = (3, _c)

_LETTER_INDEX = {"i": 0, "x": 1, "y": 2, "z": 3}

MAX_ORACLE_DIM = 16


class ExactError(ValueError):
    pass


def to_rational(value, what="value") -> Fraction:
    """Exact rational for ``value``.

    Floats are read through their shortest decimal representation, so the
    JSON literal ``0.42`` becomes ``21/50``.  Strings may be ``"p/q"``.
    """
    if isinstance(value, bool):
        raise ExactError(f"{what}: boolean is not a number")
    if isinstance(value, numbers.Rational):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ExactError(f"{what}: non-finite value {value!r} has no rational form")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise ExactError(f"{what}: cannot read {value!r} as a rational") from None
    raise ExactError(f"{what}: {value!r} is not rational")


# ---------------------------------------------------------------------------
# Gaussian rationals as (re, im) pairs of Fractions


def _gmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gsub(a, b):
    return (a[0] - b[0], a[1] - b[1])


_IPOW = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)),
         (Fraction(-1), Fraction(0)), (Fraction(0), Fraction(-1))]


def system_basis_labels(n: int) -> list:
    """Labels of the u(n) basis: ``("d", j)``, then ``("s", j, k)``, ``("a", j, k)``."""
    out = [("d", j) for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            out.append(("s", j, k))
            out.append(("a", j, k))
    return out


def _system_matrix(label, n):
    """Gaussian-integer matrix as a dict {(r, c): (re, im)}."""
    if label[0] == "d":
        return {(label[1], label[1]): (1, 0)}
    _, j, k = label
    if label[0] == "s":
        return {(j, k): (1, 0), (k, j): (1, 0)}
    return {(j, k): (0, 1), (k, j): (0, -1)}


@lru_cache(maxsize=None)
def system_product_table(n: int):
    """``S_a S_b = sum_c coef * S_c`` with Gaussian-rational coefficients.

    Returns a dict ``(a, b) -> {c: (re, im)}``.
    """
    labels = system_basis_labels(n)
    index = {lab: i for i, lab in enumerate(labels)}
    mats = [_system_matrix(lab, n) for lab in labels]
    table = {}
    for a, b in product(range(len(labels)), repeat=2):
        prod = {}
        for (r, c1), va in mats[a].items():
            for (c2, c), vb in mats[b].items():
                if c1 != c2:
                    continue
                v = _gmul((Fraction(va[0]), Fraction(va[1])), (Fraction(vb[0]), Fraction(vb[1])))
                old = prod.get((r, c), (Fraction(0), Fraction(0)))
                prod[(r, c)] = (old[0] + v[0], old[1] + v[1])
        coeffs = {}
        for (r, c), v in prod.items():
            if v == (0, 0):
                continue
            if r == c:
                key, add = index[("d", r)], v
                coeffs[key] = _gadd(coeffs.get(key), add)
                continue
            j, k = min(r, c), max(r, c)
            # e_jk = (s - i a)/2, e_kj = (s + i a)/2
            sgn = -1 if r == j else 1
            half = Fraction(1, 2)
            s_part = (v[0] * half, v[1] * half)
            a_part = _gmul(v, (Fraction(0), Fraction(sgn) * half))
            ks, ka = index[("s", j, k)], index[("a", j, k)]
            coeffs[ks] = _gadd(coeffs.get(ks), s_part)
            coeffs[ka] = _gadd(coeffs.get(ka), a_part)
        table[(a, b)] = {c: v for c, v in coeffs.items() if v != (0, 0)}
    return table


def _gadd(a, b):
    if a is None:
        return b
    return (a[0] + b[0], a[1] + b[1])


def word_labels(m: int) -> list:
    return ["".join(w) for w in product("ixyz", repeat=m)]


def _word_product(w, v):
    phase, out = 0, []
    for a, b in zip(w, v):
        p, c = _LETTER_PRODUCT[_LETTER_INDEX[a]][_LETTER_INDEX[b]]
        phase += p
        out.append("ixyz"[c])
    return phase % 4, "".join(out)


class StructureTable:
    """Commutators of the Hermitian product basis.

    ``bracket(A, B)`` returns ``{C: psi}`` with rational ``psi`` such that
    ``[i T_A, i T_B] = i * sum_C psi_C T_C``.
    """

    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.system_labels = system_basis_labels(n)
        self.words = word_labels(m)
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self.size = len(self.system_labels) * len(self.words)
        self._sys = system_product_table(n)
        self._cache = {}

    def index(self, a: int, w: int) -> int:
        return a * len(self.words) + w

    def split(self, idx: int) -> tuple:
        return divmod(idx, len(self.words))

    def bracket(self, A: int, B: int) -> dict:
        key = (A, B)
        if key in self._cache:
            return self._cache[key]
        a, w = self.split(A)
        b, v = self.split(B)
        p1, u = _word_product(self.words[w], self.words[v])
        p2, _ = _word_product(self.words[v], self.words[w])
        ui = self.word_index[u]
        out = {}
        ab, ba = self._sys[(a, b)], self._sys[(b, a)]
        for c in set(ab) | set(ba):
            zero = (Fraction(0), Fraction(0))
            kappa = _gsub(_gmul(ab.get(c, zero), _IPOW[p1]), _gmul(ba.get(c, zero), _IPOW[p2]))
            if kappa == zero:
                continue
            if kappa[0] != 0:
                raise AssertionError("commutator of Hermitian elements is not anti-Hermitian")
            # [T_A, T_B] = sum i*phi T_C and [iT_A, iT_B] = -[T_A, T_B]
            out[self.index(c, ui)] = -kappa[1]
        self._cache[key] = out
        return out

    def coo(self):
        """All nonzero constants as integer arrays scaled by a common factor.

        Returns ``(A, B, C, values, scale)`` with ``values / scale`` the exact
        structure constants.
        """
        entries = []
        for A in range(self.size):
            for B in range(self.size):
                for C, psi in self.bracket(A, B).items():
                    entries.append((A, B, C, psi))
        den = reduce(math.lcm, (e[3].denominator for e in entries), 1)
        A = np.array([e[0] for e in entries], dtype=np.int64)
        B = np.array([e[1] for e in entries], dtype=np.int64)
        C = np.array([e[2] for e in entries], dtype=np.int64)
        vals = np.array([int(e[3] * den) for e in entries], dtype=object)
        return A, B, C, vals, den


@lru_cache(maxsize=8)
def structure_table(n: int, m: int) -> StructureTable:
    return StructureTable(n, m)


@lru_cache(maxsize=8)
def _coo(n: int, m: int):
    A, B, C, vals, den = structure_table(n, m).coo()
    order = np.argsort(C, kind="stable")
    A, B, C, vals = A[order], B[order], C[order], vals[order]
    starts = np.flatnonzero(np.r_[True, C[1:] != C[:-1]]) if len(C) else np.array([], dtype=int)
    return A, B, C, vals, den, starts


@dataclass(frozen=True)
class ExactOperator:
    """``i * sum terms[(a, w)] * S_a (x) P_w`` with rational coefficients."""

    n: int
    m: int
    terms: dict

    @classmethod
    def from_terms(cls, n, m, terms):
        """Build from ``{(a, word): (coef, phase)}`` or ``{(a, word): coef}``.

        A phase ``p`` means the coefficient multiplies ``i**p``; only odd
        phases describe anti-Hermitian operators.
        """
        out = {}
        for (a, w), val in terms.items():
            if isinstance(val, tuple):
                coef, phase = val
            else:
                coef, phase = val, 1
            if phase % 2 == 0:
                raise ExactError("even phase: term is not anti-Hermitian")
            coef = Fraction(coef) * (1 if phase % 4 == 1 else -1)
            key = (a, w if isinstance(w, str) else word_labels(m)[w])
            out[key] = out.get(key, Fraction(0)) + coef
        return cls(n, m, {k: v for k, v in out.items() if v})

    def _check(self, other):
        if (self.n, self.m) != (other.n, other.m):
            raise ExactError(f"ambient mismatch: {(self.n, self.m)} vs {(other.n, other.m)}")

    def __add__(self, other):
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return ExactOperator(self.n, self.m, {k: v for k, v in out.items() if v})

    def __rmul__(self, scalar):
        s = Fraction(scalar)
        return ExactOperator(self.n, self.m, {k: s * v for k, v in self.terms.items() if s})

    def vector(self) -> list:
        t = structure_table(self.n, self.m)
        v = [Fraction(0)] * t.size
        for (a, w), c in self.terms.items():
            v[t.index(a, t.word_index[w])] = c
        return v

    @classmethod
    def from_vector(cls, n, m, vec):
        t = structure_table(n, m)
        terms = {}
        for idx, c in enumerate(vec):
            if c:
                a, w = t.split(idx)
                terms[(a, t.words[w])] = Fraction(c)
        return cls(n, m, terms)

    def to_matrix(self) -> np.ndarray:
        """Floating-point matrix, for comparison with the numeric engine."""
        t = structure_table(self.n, self.m)
        from .operators import pauli_word_matrix

        d = self.n * 2**self.m
        out = np.zeros((d, d), dtype=np.complex128)
        for (a, w), c in self.terms.items():
            s = np.zeros((self.n, self.n), dtype=np.complex128)
            for (r, col), (re, im) in _system_matrix(t.system_labels[a], self.n).items():
                s[r, col] = re + 1j * im
            out += 1j * float(c) * np.kron(s, pauli_word_matrix(w))
        return out


def exact_commutator(a: ExactOperator, b: ExactOperator) -> ExactOperator:
    a._check(b)
    t = structure_table(a.n, a.m)
    out = {}
    for (sa, wa), ca in a.terms.items():
        A = t.index(sa, t.word_index[wa])
        for (sb, wb), cb in b.terms.items():
            B = t.index(sb, t.word_index[wb])
            for C, psi in t.bracket(A, B).items():
                out[C] = out.get(C, Fraction(0)) + ca * cb * psi
    terms = {}
    for C, v in out.items():
        if v:
            s, w = t.split(C)
            terms[(s, t.words[w])] = v
    return ExactOperator(a.n, a.m, terms)


# ---------------------------------------------------------------------------
# integer engine for the closure


def _primitive(vec):
    g = 0
    for x in vec:
        if x:
            g = math.gcd(g, x)
            if g == 1:
                break
    if g > 1:
        vec = vec // g
    nz = np.flatnonzero(vec != 0)
    if len(nz) and vec[nz[0]] < 0:
        vec = -vec
    return vec


def _integer_vector(op: ExactOperator):
    v = op.vector()
    den = reduce(math.lcm, (c.denominator for c in v), 1)
    return _primitive(np.array([int(c * den) for c in v], dtype=object))


class _Echelon:
    """Row echelon form over the integers (fraction-free elimination)."""

    def __init__(self):
        self.pivots = {}
        self.rows = []

    def reduce(self, vec):
        vec = vec.copy()
        while True:
            nz = np.flatnonzero(vec != 0)
            if not len(nz):
                return None
            lead = int(nz[0])
            row = self.pivots.get(lead)
            if row is None:
                return _primitive(vec)
            vec = _primitive(row[lead] * vec - vec[lead] * row)

    def insert(self, vec):
        r = self.reduce(vec)
        if r is None:
            return False
        lead = int(np.flatnonzero(r != 0)[0])
        self.pivots[lead] = r
        self.rows.append(r)
        return True


def _int_commutator(a, b, n, m):
    A, B, C, vals, _, starts = _coo(n, m)
    prods = a[A] * b[B] * vals
    out = np.zeros(structure_table(n, m).size, dtype=object)
    if len(starts):
        sums = np.add.reduceat(prods, starts)
        out[C[starts]] = sums
    out[out == 0] = 0
    return out


def exact_closure_dim(generators, cap: int | None = None) -> int:
    """Exact dimension of the Lie algebra generated by ``generators``.

    Breadth-first closure identical in structure to the numeric engine, with
    linear independence decided by fraction-free elimination over the
    integers.
    """
    generators = list(generators)
    if not generators:
        raise ExactError("empty generator list")
    n, m = generators[0].n, generators[0].m
    for g in generators:
        if (g.n, g.m) != (n, m):
            raise ExactError("ambient mismatch among generators")
    target = (n * 2**m) ** 2 - 1
    cap = target if cap is None else min(cap, target)
    ech = _Echelon()
    basis = []
    for g in generators:
        # drop the trace, as the numeric engine does
        terms = dict(g.terms)
        tr = sum((c for (a, w), c in terms.items() if w == "i" * m and a < n), Fraction(0))
        if tr:
            for j in range(n):
                key = (j, "i" * m)
                terms[key] = terms.get(key, Fraction(0)) - tr / n
        v = _integer_vector(ExactOperator(n, m, {k: c for k, c in terms.items() if c}))
        if len(basis) < cap and ech.insert(v):
            basis.append(ech.rows[-1])
    frontier = list(range(len(basis)))
    while frontier and len(basis) < cap:
        snap = len(basis)
        fset = set(frontier)
        new = []
        for p in frontier:
            for q in range(snap):
                if q in fset and q >= p:
                    continue
                c = _int_commutator(basis[p], basis[q], n, m)
                if not np.any(c != 0):
                    continue
                if ech.insert(_primitive(c)):
                    basis.append(ech.rows[-1])
                    new.append(len(basis) - 1)
                    if len(basis) >= cap:
                        break
            if len(basis) >= cap:
                break
        frontier = new
    return len(basis)


# ---------------------------------------------------------------------------
# models


def _sys_index(n):
    labels = system_basis_labels(n)
    return {lab: i for i, lab in enumerate(labels)}


def exact_generators(model: ControlModel) -> list:
    """``i H_0`` and the control generators as exact operators.

    Raises :class:`ExactError` if a parameter has no exact rational form or
    the ambient dimension exceeds the oracle limit.
    """
    n, m = model.n, model.m
    if n * 2**m > MAX_ORACLE_DIM:
        raise ExactError(f"oracle limited to dimension {MAX_ORACLE_DIM}, model has {n * 2**m}")
    idx = _sys_index(n)
    ident_sys = [idx[("d", j)] for j in range(n)]
    terms = {}

    def add(a, word, coef):
        key = (a, word)
        terms[key] = terms.get(key, Fraction(0)) + coef

    energies = [to_rational(e, f"system.energies[{i}]") for i, e in enumerate(model.system.energies)]
    mean = sum(energies, Fraction(0)) / n
    for j, e in enumerate(energies):
        add(idx[("d", j)], "i" * m, e - mean)
    for site, w in enumerate(model.accessor.frequencies, start=1):
        w = to_rational(w, f"accessor.frequencies[{site - 1}]")
        word = "i" * (site - 1) + "z" + "i" * (m - site)
        for a in ident_sys:
            add(a, word, w)
    for site, c in enumerate(model.accessor.chain_couplings, start=1):
        c = to_rational(c, f"accessor.chain_couplings[{site - 1}]")
        word = "i" * (site - 1) + "xx" + "i" * (m - site - 1)
        for a in ident_sys:
            add(a, word, c)
    for (word, j, k), g in model.coupling.items():
        g = to_rational(g, f"coupling[{word},{j},{k}]")
        if k == 1:
            add(idx[("s", j - 1, j)], word, g)
        elif k == -1:
            add(idx[("a", j - 1, j)], word, g)
        else:
            add(idx[("d", j - 1)], word, g)
            add(idx[("d", j)], word, -g)
    drift = ExactOperator(n, m, {k: v for k, v in terms.items() if v})
    controls = []
    for site in range(1, m + 1):
        for letter in "xy":
            word = "i" * (site - 1) + letter + "i" * (m - site)
            controls.append(ExactOperator(n, m, {(a, word): Fraction(1) for a in ident_sys}))
    return [drift, *controls]


@dataclass
class AgreementReport:
    numeric_dimension: int
    exact_dimension: int
    target: int

    @property
    def agree(self) -> bool:
        return self.numeric_dimension == self.exact_dimension

    def to_dict(self):
        return {"numeric_dimension": self.numeric_dimension, "exact_dimension": self.exact_dimension,
                "target": self.target, "agree": self.agree}


def agreement_check(model: ControlModel, tol=None) -> AgreementReport:
    """Run the numeric and the exact closure on the same model."""
    from .closure import closure_generators, generate_closure
    from .linalg import DEFAULT_TOL

    exact_dim = exact_closure_dim(exact_generators(model))
    _, rep = generate_closure(closure_generators(model), tol=tol or DEFAULT_TOL)
    return AgreementReport(rep.dimension, exact_dim, model.target_dimension)


__all__ = [
    "ExactError", "ExactOperator", "StructureTable", "AgreementReport", "agreement_check",
    "exact_closure_dim", "exact_commutator", "exact_generators", "structure_table", "to_rational",
]
