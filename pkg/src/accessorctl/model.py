"""The indirect-control model: system, XY accessor chain, coupling, generators.

A :class:`ControlModel` bundles an ``N``-level system with diagonal
Hamiltonian, an ``M``-qubit open chain with ``sigma_x sigma_x`` neighbour
coupling, and a coupling tensor ``g[word, j, k]`` that attaches Chevalley
generators of su(N) to Pauli words on the chain.  Classical controls act on
the chain only, through ``sigma_x`` and ``sigma_y`` on every site.

Parameters may be ints, floats or :class:`fractions.Fraction`; matrices are
always built in double precision.  The exact oracle reads the raw values.
"""
from __future__ import annotations

import math
import numbers
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .linalg import kron, project_traceless
from .operators import (
    GRADES,
    chevalley,
    embed_accessor,
    enumerate_words,
    local_op,
    normalize_word,
    pauli_word_matrix,
    site_word,
)


class ModelError(ValueError):
    """Invalid model parameters."""


def _check_real(value, what):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ModelError(f"{what} must be a real number, got {value!r}")
    if not math.isfinite(float(value)):
        raise ModelError(f"{what} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class SystemSpec:
    energies: tuple

    def __post_init__(self):
        energies = tuple(self.energies)
        if len(energies) < 2:
            raise ModelError(f"system dimension must be >= 2, got {len(energies)}")
        for i, e in enumerate(energies):
            _check_real(e, f"system.energies[{i}]")
        object.__setattr__(self, "energies", energies)

    @property
    def n(self) -> int:
        return len(self.energies)

    @property
    def shift(self):
        """Mean energy removed to make the Hamiltonian traceless."""
        if all(isinstance(e, numbers.Rational) for e in self.energies):
            return Fraction(sum(self.energies), self.n)
        return sum(self.energies) / self.n

    @property
    def was_shifted(self) -> bool:
        return self.shift != 0

    @property
    def shifted_energies(self) -> tuple:
        s = self.shift
        return tuple(e - s for e in self.energies)

    @property
    def partial_sums(self) -> tuple:
        """``eps_i = E_1 + ... + E_i`` of the shifted energies, i = 1..N-1."""
        out, acc = [], 0
        for e in self.shifted_energies[:-1]:
            acc = acc + e
            out.append(acc)
        return tuple(out)


@dataclass(frozen=True)
class AccessorSpec:
    frequencies: tuple
    chain_couplings: tuple = ()

    def __post_init__(self):
        freqs = tuple(self.frequencies)
        chain = tuple(self.chain_couplings)
        if len(freqs) < 1:
            raise ModelError("accessor needs at least one qubit")
        if len(chain) != len(freqs) - 1:
            raise ModelError(
                f"accessor.chain_couplings must have {len(freqs) - 1} entries, got {len(chain)}")
        for i, w in enumerate(freqs):
            _check_real(w, f"accessor.frequencies[{i}]")
        for i, c in enumerate(chain):
            _check_real(c, f"accessor.chain_couplings[{i}]")
            if c == 0:
                raise ModelError(f"accessor.chain_couplings[{i}]: zero chain coupling")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "chain_couplings", chain)

    @property
    def m(self) -> int:
        return len(self.frequencies)


class CouplingTensor:
    """Sparse real coefficients ``g[(word, j, k)]``.

    Words use only the letters x, y, z; ``j`` is a simple-root index
    (1-based) and ``k`` a grade in {+1, 0, -1}.
    """

    def __init__(self, entries=None):
        self._g = {}
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for key, g in items:
                self.add(*key, g)

    def add(self, word, j, k, g):
        word = normalize_word(word, allow_identity=False)
        if isinstance(j, bool) or not isinstance(j, numbers.Integral) or j < 1:
            raise ModelError(f"root index j must be a positive integer, got {j!r}")
        if k not in GRADES or isinstance(k, bool):
            raise ModelError(f"grade k must be -1, 0 or +1, got {k!r}")
        if isinstance(g, numbers.Complex) and not isinstance(g, numbers.Real):
            raise ModelError(f"coefficient must be real, got {g!r}")
        _check_real(g, "coupling coefficient")
        key = (word, int(j), int(k))
        self._g[key] = self._g.get(key, 0) + g
        return self

    def items(self):
        return sorted(self._g.items(), key=lambda kv: (kv[0][0], kv[0][1], -kv[0][2]))

    def get(self, word, j, k, default=0):
        return self._g.get((word, j, k), default)

    def words(self) -> set:
        return {w for (w, _, _) in self._g}

    def __len__(self):
        return len(self._g)

    def __eq__(self, other):
        return isinstance(other, CouplingTensor) and self._g == other._g

    def __repr__(self):
        return f"CouplingTensor({dict(self.items())!r})"

    def scaled_rows(self, factors: dict) -> "CouplingTensor":
        """Copy with every coefficient of word ``w`` multiplied by ``factors[w]``."""
        return CouplingTensor({key: g * factors.get(key[0], 1) for key, g in self._g.items()})

    def validate(self, n: int, m: int):
        for (word, j, k) in self._g:
            if len(word) != m:
                raise ModelError(f"word {word!r} has length {len(word)}, expected {m}")
            if not 1 <= j <= n - 1:
                raise ModelError(f"root index {j} out of range 1..{n - 1}")


def column_labels(n: int) -> list:
    """Column order ``(j, k)`` of the coupling matrix: grade 0, +1, -1, roots ascending."""
    return [(j, k) for k in (0, 1, -1) for j in range(1, n)]


def coupling_matrix(coupling: CouplingTensor, n: int, m: int):
    """The ``3**m x 3(n-1)`` real coefficient matrix, rows = words (lexicographic)."""
    words = enumerate_words(m)
    cols = column_labels(n)
    g = np.array([[float(coupling.get(w, j, k)) for (j, k) in cols] for w in words])
    return g, words, cols


class AccessorHamiltonian(NamedTuple):
    free: np.ndarray
    interaction: np.ndarray
    total: np.ndarray


def build_system_hamiltonian(spec: SystemSpec) -> np.ndarray:
    """Diagonal system Hamiltonian, shifted to be traceless.

    Computed both as ``sum E_i e_ii`` and as ``sum eps_i h_i``; the two forms
    are compared as a self-check.
    """
    if spec.was_shifted:
        warnings.warn(f"system energies shifted by their mean {float(spec.shift):g} "
                      "to make H_S traceless", stacklevel=2)
    diag_form = np.diag(np.array([float(e) for e in spec.shifted_energies], dtype=np.complex128))
    cartan = chevalley(spec.n).h
    cartan_form = sum(float(eps) * h for eps, h in zip(spec.partial_sums, cartan))
    scale = max(1.0, float(np.abs(diag_form).max()))
    if not np.allclose(diag_form, cartan_form, rtol=0, atol=1e-12 * scale):
        raise AssertionError("Cartan form of H_S disagrees with the diagonal form")
    return diag_form


def build_accessor_hamiltonian(spec: AccessorSpec) -> AccessorHamiltonian:
    m = spec.m
    dim = 2**m
    free = np.zeros((dim, dim), dtype=np.complex128)
    inter = np.zeros((dim, dim), dtype=np.complex128)
    for i, w in enumerate(spec.frequencies, start=1):
        free += float(w) * pauli_word_matrix(site_word(m, i, "z"))
    for i, c in enumerate(spec.chain_couplings, start=1):
        if c == 0:
            raise ModelError("zero chain coupling")
        word = "i" * (i - 1) + "xx" + "i" * (m - i - 1)
        inter += float(c) * pauli_word_matrix(word)
    return AccessorHamiltonian(free, inter, free + inter)


def build_interaction_hamiltonian(coupling: CouplingTensor, n: int, m: int) -> np.ndarray:
    coupling.validate(n, m)
    chev = chevalley(n)
    out = np.zeros((n * 2**m, n * 2**m), dtype=np.complex128)
    for (word, j, k), g in coupling.items():
        out += float(g) * kron(chev.s(j, k), pauli_word_matrix(word))
    return out


@dataclass(frozen=True, eq=False)
class ControlModel:
    system: SystemSpec
    accessor: AccessorSpec
    coupling: CouplingTensor = field(default_factory=CouplingTensor)

    def __post_init__(self):
        self.coupling.validate(self.n, self.m)

    @property
    def n(self) -> int:
        return self.system.n

    @property
    def m(self) -> int:
        return self.accessor.m

    @property
    def dim(self) -> int:
        return self.n * 2**self.m

    @property
    def target_dimension(self) -> int:
        return self.dim**2 - 1

    @cached_property
    def system_hamiltonian(self) -> np.ndarray:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return build_system_hamiltonian(self.system)

    @cached_property
    def accessor_hamiltonian(self) -> AccessorHamiltonian:
        return build_accessor_hamiltonian(self.accessor)

    @cached_property
    def interaction_hamiltonian(self) -> np.ndarray:
        return build_interaction_hamiltonian(self.coupling, self.n, self.m)

    @cached_property
    def drift(self) -> np.ndarray:
        h = assemble_drift(self)
        h.setflags(write=False)
        return h

    @cached_property
    def controls(self) -> list:
        return control_generators(self)

    def notes(self) -> list:
        out = []
        if self.system.was_shifted:
            out.append(f"energies shifted by mean {float(self.system.shift):.17g}")
        return out


def assemble_drift(model: ControlModel) -> np.ndarray:
    """``H_S (x) 1 + 1 (x) H_A + H_I``."""
    n, m = model.n, model.m
    h = kron(model.system_hamiltonian, np.eye(2**m))
    h = h + embed_accessor(n, model.accessor_hamiltonian.total)
    h = h + model.interaction_hamiltonian
    return h


def control_generators(model: ControlModel) -> list:
    """``i 1 (x) sigma_x^j`` and ``i 1 (x) sigma_y^j``, x before y, sites ascending."""
    out = []
    for site in range(1, model.m + 1):
        for letter in "xy":
            out.append(1j * local_op(model.n, model.m, site, letter))
    return out


def drift_generator(model: ControlModel) -> np.ndarray:
    """``i H_0`` with its identity component removed."""
    return project_traceless(1j * model.drift)


@dataclass
class SizeCondition:
    n: int
    m: int
    feasible: bool
    margin: int
    prior_feasible: bool
    prior_margin: int

    @property
    def reason(self) -> str:
        lhs, rhs = 3**self.m, 3 * (self.n - 1)
        return f"{lhs} {'>=' if self.feasible else '<'} {rhs}"

    def to_dict(self):
        return {
            "n": self.n, "m": self.m, "feasible": self.feasible, "margin": self.margin,
            "reason": self.reason,
            "prior_scheme": {"feasible": self.prior_feasible, "margin": self.prior_margin},
        }


def check_size_condition(n: int, m: int) -> SizeCondition:
    """Chain-length condition ``3**m >= 3(n-1)``.

    The bound ``2**m >= 2(n-1)`` of the earlier excitation-field scheme is
    reported alongside for comparison.
    """
    if n < 2 or m < 1:
        raise ModelError(f"need n >= 2 and m >= 1, got n={n}, m={m}")
    margin = 3**m - 3 * (n - 1)
    prior = 2**m - 2 * (n - 1)
    return SizeCondition(n, m, margin >= 0, margin, prior >= 0, prior)


@dataclass
class RankReport:
    rank: int
    required: int
    feasible: bool
    words: list | None
    determinant: float | None
    columns: list
    matrix: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "rank": self.rank,
            "required": self.required,
            "feasible": self.feasible,
            "feasible_subset": self.words,
            "determinant_of_subset": self.determinant,
            "columns": [f"{j}({k})" for (j, k) in self.columns],
            "reason": None if self.feasible else f"coupling rank {self.rank} < {self.required}",
        }


def coupling_rank_check(coupling: CouplingTensor, n: int, m: int, rank_tol: float = 1e-9) -> RankReport:
    """Full-column-rank test of the coupling matrix.

    Column-pivoted QR of the transposed matrix picks a well-conditioned set
    of word rows; when the rank equals ``3(n-1)`` those rows form a certified
    nonsingular square submatrix whose determinant is reported.
    """
    g, words, cols = coupling_matrix(coupling, n, m)
    required = 3 * (n - 1)
    if not np.any(g):
        return RankReport(0, required, False, None, None, cols, g)
    _, r, piv = scipy.linalg.qr(g.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > rank_tol * diag[0]))
    if rank < required:
        return RankReport(rank, required, False, None, None, cols, g)
    rows = sorted(int(p) for p in piv[:required])
    det = float(np.linalg.det(g[rows, :]))
    return RankReport(rank, required, True, [words[i] for i in rows], det, cols, g)
