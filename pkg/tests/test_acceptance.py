"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (outside pytest's capture)
before asserting.  Run ``python tests/test_acceptance.py`` for the summary
alone.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from accessorctl.closure import closure_generators, contains, controllability_verdict, generate_closure
from accessorctl.config import SplitMix64, load_config, parse_config, random_config, random_rational_model
from accessorctl.decoupling import audit_identity, layer_sizes, rotate_word, run_proof
from accessorctl.exact import agreement_check, exact_closure_dim, exact_generators
from accessorctl.linalg import LieBasis, commutator, hs_inner, hs_norm, kron, orthonormal_insert
from accessorctl.model import AccessorSpec, ControlModel, CouplingTensor, SystemSpec, check_size_condition
from accessorctl.operators import chevalley, embed_accessor, enumerate_words, pauli_word_matrix

from conftest import SEC4_COLS, random_skew, sec4_model, two_level_model

EPS = np.finfo(float).eps


@pytest.fixture
def verdict(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{criterion}] {detail}")
        assert ok, detail
    return emit


def test_01_two_level_closure(verdict):
    model = two_level_model()
    t0 = time.perf_counter()
    report = controllability_verdict(model)
    elapsed = time.perf_counter() - t0
    exact = exact_closure_dim(exact_generators(model))
    ok = report.dimension == 15 and exact == 15 and elapsed < 1.0
    verdict("1 two-level", ok, f"dimension {report.dimension}, exact {exact}, {elapsed:.3f} s (< 1 s)")


def test_02_three_level_closure(verdict):
    model = sec4_model()
    t0 = time.perf_counter()
    report = controllability_verdict(model)
    elapsed = time.perf_counter() - t0
    exact = exact_closure_dim(exact_generators(model))
    ok = report.dimension == 143 and exact == 143 and elapsed < 60.0
    verdict("2 three-level", ok, f"dimension {report.dimension}, exact {exact}, {elapsed:.2f} s (< 60 s)")


def test_03_four_level_boundary(verdict):
    model, tol = parse_config(random_config(4, 2, 2024))
    t0 = time.perf_counter()
    report = controllability_verdict(model, tol)
    elapsed = time.perf_counter() - t0
    rank = report.condition_results["rank"]
    ok = report.dimension == 255 and rank["feasible"] and elapsed < 600.0
    verdict("3 four-level N=4 M=2", ok,
            f"dimension {report.dimension}, rank {rank['rank']}/9, {elapsed:.2f} s (< 600 s)")


def test_04_size_condition_table(verdict):
    table = {(2, 1): True, (3, 1): False, (4, 2): True, (5, 2): False}
    got = {k: check_size_condition(*k).feasible for k in table}
    verdict("4 size condition", got == table, f"{got}")


def test_05_xy_only_family(verdict):
    _, reproduced, _ = load_config("builtin:xy_only_sp4")
    dim10 = controllability_verdict(reproduced).dimension
    dims = []
    for seed in range(12):
        g = SplitMix64(seed)
        coupling = CouplingTensor({(w, 1, k): g.uniform() for w in "xy" for k in (1, -1)})
        model = ControlModel(SystemSpec((g.uniform(), g.uniform())), AccessorSpec((g.uniform(),)), coupling)
        dims.append(controllability_verdict(model).dimension)
    ok = dim10 == 10 and all(d < 15 for d in dims)
    verdict("5 x,y-only family", ok, f"reproduced {dim10}, members {sorted(set(dims))} (all < 15)")


DISPLAYED = {"yy": "xx", "yx": "xy", "yz": "xz", "zy": "xx", "zx": "xy", "zz": "xz"}


def test_06_decoupling_certificates(verdict):
    model = sec4_model()
    proof = run_proof(model, check_closure=False)
    certs = {c.word: c for c in proof.certificates}
    worst_cert = max(c.residual for c in proof.certificates)
    sizes = layer_sizes(proof.certificates)
    chev = chevalley(3)
    worst_shown = 0.0
    for word, shown in DISPLAYED.items():
        part = sum(float(model.coupling.get(word, j, k)) * chev.s(j, k) for j, k in SEC4_COLS)
        target = 1j * kron(part, pauli_word_matrix(shown))
        got = rotate_word(certs[word].produced, word, shown, 3, proof.context)
        worst_shown = max(worst_shown, float(np.abs(got - target).max()))
    ok = len(certs) == 9 and worst_cert < 1e-8 and sizes == [4, 4, 1] and worst_shown < 1e-8
    verdict("6 decoupling", ok,
            f"{len(certs)} certificates, layers {sizes}, max residual {worst_cert:.2e}, "
            f"displayed elements max entry error {worst_shown:.2e}")


def test_07_accessor_generation(verdict):
    dims = {}
    for m in (2, 3):
        gens = [1j * pauli_word_matrix("i" * (s - 1) + l + "i" * (m - s)) for s in range(1, m + 1) for l in "xy"]
        gens += [1j * pauli_word_matrix("i" * (j - 1) + "xx" + "i" * (m - j - 1)) for j in range(1, m)]
        dims[m] = len(generate_closure(gens)[0])
    model = sec4_model()
    c1 = model.accessor.chain_couplings[0]
    chain = 1j * embed_accessor(3, model.accessor_hamiltonian.interaction)
    y1 = 1j * embed_accessor(3, pauli_word_matrix("yi"))
    dbl = commutator(commutator(chain, y1), y1)
    unit = 1j * embed_accessor(3, pauli_word_matrix("xx"))
    coef = hs_inner(unit, dbl) / hs_inner(unit, unit)
    rel = abs(coef - (-4 * c1)) / abs(4 * c1)
    exact_shape = hs_norm(dbl - coef * unit) / hs_norm(dbl)
    ok = dims == {2: 15, 3: 63} and rel < 1e-12 and exact_shape < 1e-12
    verdict("7 accessor generation", ok, f"closures {dims}, double commutator coefficient {coef!r} vs "
                                         f"-4c1 = {-4 * c1!r} (rel err {rel:.1e})")


def test_08_counting_identity(verdict):
    bad = [(n, m) for n in range(2, 7) for m in range(1, 5) if len(set(audit_identity(n, m))) != 1]
    verdict("8 counting identity", not bad, f"2<=N<=6, 1<=M<=4, violations {bad}")


def test_09_oracle_agreement(verdict):
    agree, dims = 0, []
    for seed in range(20):
        model = random_rational_model(2, 1 + seed % 2, seed, density=0.3)
        rep = agreement_check(model)
        agree += rep.agree
        dims.append(rep.exact_dimension)
    verdict("9 oracle agreement", agree == 20, f"{agree}/20 agree, exact dimensions {sorted(set(dims))}")


def _random_model(r, n, m, density):
    entries = {(w, j, k): r.uniform(-1, 1) for w in enumerate_words(m) for j in range(1, n) for k in (1, 0, -1)
               if r.uniform() < density}
    return ControlModel(SystemSpec(tuple(r.uniform(-1, 1, n))), AccessorSpec(tuple(r.uniform(-1, 1, m))),
                        CouplingTensor(entries))


def _dim(gens):
    return len(generate_closure(gens)[0])


def test_10_property_suite(verdict):
    r = np.random.default_rng(20240601)
    failures = []

    for n in (2, 3):
        for _ in range(3):
            gens = closure_generators(_random_model(r, n, 1, 0.3))
            q, rr = np.linalg.qr(r.normal(size=(2 * n, 2 * n)) + 1j * r.normal(size=(2 * n, 2 * n)))
            u = q * (np.diag(rr) / np.abs(np.diag(rr)))
            if _dim(gens) != _dim([u @ g @ u.conj().T for g in gens]):
                failures.append(f"unitary N={n}")

    for _ in range(5):
        gens = closure_generators(_random_model(r, 2, 1, 0.4))
        i = int(r.integers(len(gens)))
        scaled = list(gens)
        scaled[i] = r.choice([-1, 1]) * r.uniform(0.01, 100) * scaled[i]
        if _dim(gens) != _dim(scaled):
            failures.append("scaling")
        if _dim(gens[:-1]) > _dim(gens):
            failures.append("monotonicity")

    for _ in range(50):
        d = int(r.integers(2, 7))
        a, b, c = (r.normal(size=(d, d)) + 1j * r.normal(size=(d, d)) for _ in range(3))
        jac = commutator(a, commutator(b, c)) + commutator(b, commutator(c, a)) + commutator(c, commutator(a, b))
        if hs_norm(jac) > 10 * EPS * hs_norm(a) * hs_norm(b) * hs_norm(c):
            failures.append("jacobi")

    basis = LieBasis(8)
    for _ in range(150):
        orthonormal_insert(basis, random_skew(r, 8))
    gram = float(np.abs(basis.gram() - np.eye(len(basis))).max())
    if gram >= 1e-12:
        failures.append("gram")

    big, rep1 = generate_closure(closure_generators(sec4_model()))
    stack = big.stack()
    worst = 0.0
    for _ in range(200):
        i, j = r.integers(len(stack), size=2)
        cm = commutator(stack[i], stack[j])
        if np.any(cm):
            worst = max(worst, contains(big, cm)[1])
    if worst >= 1e-8:
        failures.append("subalgebra")

    again, rep2 = generate_closure(closure_generators(sec4_model()), workers=2)
    same = (rep1.dimension, rep1.rounds, rep1.commutators_evaluated) == \
        (rep2.dimension, rep2.rounds, rep2.commutators_evaluated)
    if not same or np.abs(big.stack() - again.stack()).max() > 1e-12:
        failures.append("determinism")

    verdict("10 property suite", not failures,
            f"failures {failures or 'none'}; gram deviation {gram:.1e}, subalgebra residual {worst:.1e}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
