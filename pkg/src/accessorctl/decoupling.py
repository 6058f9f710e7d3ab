"""Constructive controllability proof as a sequence of checked matrix steps.

The drift is split into its coupling terms ("nomials"), one Pauli word at a
time, using only commutators with the accessor controls, selection
operators and subtraction of pieces already shown to be in the algebra.
Every nomial comes with a :class:`DecouplingCertificate` whose chain of
steps can be replayed from the drift.  The isolated terms are then solved
for the bare system generators, the accessor algebra is grown from the
chain coupling, and the three resulting families are counted and checked
for independence.

Signs and scale factors are never hard-coded: each chain's gain is measured
by running its linear part on a unit probe.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .closure import closure_generators, contains, generate_closure
from .linalg import (
    DEFAULT_TOL,
    LieBasis,
    ToleranceConfig,
    commutator,
    hs_inner,
    hs_norm,
    orthonormal_insert,
)
from .model import ControlModel, CouplingTensor, column_labels, coupling_matrix, drift_generator
from .operators import (
    cartan_su_basis,
    chevalley,
    embed_accessor,
    embed_system,
    enumerate_words,
    layer_size,
    local_op,
    pauli_word_matrix,
    z_count,
)


class DecouplingError(RuntimeError):
    """A certificate or extraction step failed its numerical check."""


class InfeasibleCouplingError(DecouplingError):
    pass


# ---------------------------------------------------------------------------
# elementary operations


def control_element(n: int, m: int, letter: str, site: int) -> np.ndarray:
    """``i 1 (x) sigma_letter`` at ``site``.

    The z control is not a raw generator; it is formed as
    ``-(1/2)[i sigma_x, i sigma_y]``.
    """
    if letter == "z":
        cx = control_element(n, m, "x", site)
        cy = control_element(n, m, "y", site)
        return -0.5 * commutator(cx, cy)
    return 1j * local_op(n, m, site, letter)


def _nm(element, m):
    d = element.shape[0]
    n, rem = divmod(d, 2**m)
    if rem or n < 1:
        raise ValueError(f"dimension {d} is not a multiple of 2**{m}")
    return n


def selection_op(site: int, variant: str, element, m: int) -> np.ndarray:
    """``(1/4)[i sigma_a, [i sigma_b, element]]`` at ``site``.

    ``variant="xy"`` uses (a, b) = (x, y): it keeps the x letter at the site
    and turns it into y.  ``"yx"`` keeps y and turns it into x.  Every other
    letter, identity included, is annihilated.
    """
    if not 1 <= site <= m:
        raise IndexError(f"site {site} out of range for a chain of {m} qubits")
    if variant not in ("xy", "yx"):
        raise ValueError(f"variant must be 'xy' or 'yx', got {variant!r}")
    element = np.asarray(element, dtype=np.complex128)
    n = _nm(element, m)
    a, b = variant
    inner = commutator(control_element(n, m, b, site), element)
    return 0.25 * commutator(control_element(n, m, a, site), inner)


def z_cascade(element, ops, m: int) -> np.ndarray:
    """Left fold of commutators with ``i sigma_letter`` at each ``(site, letter)``.

    ``ops`` must mention every site exactly once; the first entry is the
    innermost commutator.
    """
    sites = [s for s, _ in ops]
    if sorted(sites) != list(range(1, m + 1)):
        raise ValueError(f"cascade must cover sites 1..{m} exactly once, got {sites}")
    element = np.asarray(element, dtype=np.complex128)
    n = _nm(element, m)
    for site, letter in ops:
        if letter not in ("x", "z"):
            raise ValueError(f"cascade letters are x or z, got {letter!r}")
        element = commutator(control_element(n, m, letter, site), element)
    return element


def nomial_project(element, word: str, n: int) -> np.ndarray:
    """System factor of the ``word`` component: ``2**-m tr_A[(1 (x) P) element]``."""
    m = len(word)
    p = pauli_word_matrix(word)
    e = np.asarray(element, dtype=np.complex128).reshape(n, 2**m, n, 2**m)
    return np.einsum("ab,ibja->ij", p, e) / 2**m


def rotation_control(src: str, dst: str) -> str:
    """Control letter whose commutator turns ``src`` into ``dst`` at one site."""
    (third,) = set("xyz") - {src, dst}
    return third


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class Step:
    kind: str
    ref: str = ""
    coef: float = 1.0

    def __str__(self):
        if self.kind == "drift":
            return "drift"
        if self.kind == "scale":
            return f"scale({self.coef:.17g})"
        if self.kind in ("sub", "add") and self.coef != 1.0:
            return f"{self.kind}({self.ref}*{self.coef:.17g})"
        return f"{self.kind}({self.ref})"


@dataclass
class Nomial:
    word: str
    system_part: np.ndarray = field(repr=False)

    @property
    def full(self) -> np.ndarray:
        return np.kron(self.system_part, pauli_word_matrix(self.word))

    @property
    def element(self) -> np.ndarray:
        """The Lie algebra element ``i * full``."""
        return 1j * self.full


@dataclass
class DecouplingCertificate:
    nomial: Nomial
    chain: list
    produced: np.ndarray = field(repr=False)
    residual: float
    scale: float
    layer: int
    deferred: bool = False
    note: str = ""
    valid: bool = True

    @property
    def word(self) -> str:
        return self.nomial.word

    def to_dict(self):
        out = {
            "word": self.word,
            "layer": self.layer,
            "chain": [str(s) for s in self.chain],
            "scale": self.scale,
            "residual": self.residual,
            "valid": self.valid,
        }
        if self.note:
            out["note"] = self.note
        return out


class ChainContext:
    """Everything a chain step may reference: the model, certified nomials
    and solved single-generator elements."""

    def __init__(self, model: ControlModel):
        self.model = model
        self.certified = {}
        self.isolated = {}
        self._controls = {}

    def control(self, letter, site):
        key = (letter, site)
        if key not in self._controls:
            self._controls[key] = control_element(self.model.n, self.model.m, letter, site)
        return self._controls[key]

    def resolve(self, ref: str) -> np.ndarray:
        kind, _, name = ref.partition(":")
        if kind == "ctrl":
            letter, _, site = name.partition("@")
            return self.control(letter, int(site))
        if kind == "cert":
            return self.certified[name]
        if kind == "iso":
            return self.isolated[name]
        raise KeyError(f"unknown reference {ref!r}")


def _apply(step: Step, x, ctx: ChainContext):
    m = ctx.model.m
    if step.kind == "comm":
        return commutator(ctx.resolve(step.ref), x)
    if step.kind == "sel":
        variant, _, site = step.ref.partition("@")
        return selection_op(int(site), variant, x, m)
    if step.kind == "scale":
        return step.coef * x
    if step.kind == "sub":
        return x - step.coef * ctx.resolve(step.ref)
    if step.kind == "add":
        return x + step.coef * ctx.resolve(step.ref)
    raise ValueError(f"unknown step kind {step.kind!r}")


def execute_chain(chain, ctx: ChainContext) -> np.ndarray:
    d = ctx.model.dim
    x = np.zeros((d, d), dtype=np.complex128)
    for step in chain:
        if step.kind == "drift":
            x = drift_generator(ctx.model)
        else:
            x = _apply(step, x, ctx)
    return x


def replay(certificate: DecouplingCertificate, ctx: ChainContext) -> np.ndarray:
    return execute_chain(certificate.chain, ctx)


def _linear_gain(steps, probe, ctx):
    x = probe
    for step in steps:
        if step.kind in ("comm", "sel", "scale"):
            x = _apply(step, x, ctx)
    return x


def _gain(steps, probe, ctx, out_probe=None) -> float:
    """Coefficient of ``out_probe`` (default ``probe``) after the linear steps."""
    out = _linear_gain(steps, probe, ctx)
    ref = probe if out_probe is None else out_probe
    return hs_inner(ref, out) / hs_inner(ref, ref)


def _word_probe(n, word):
    return 1j * np.kron(np.eye(n), pauli_word_matrix(word))


def _residual(produced, target, floor) -> float:
    num = hs_norm(produced - target)
    den = max(hs_norm(target), hs_norm(produced))
    if den <= floor:
        return 0.0
    return num / den


def nomial_of(model: ControlModel, word: str) -> Nomial:
    chev = chevalley(model.n)
    part = np.zeros((model.n, model.n), dtype=np.complex128)
    for j, k in column_labels(model.n):
        g = model.coupling.get(word, j, k)
        if g:
            part = part + float(g) * chev.s(j, k)
    return Nomial(word, part)


def filter_steps(word: str, m: int) -> list:
    """Cascade, selection and rotate-back steps isolating ``word``.

    Sites holding z get a commutator with the x control (z -> y, x killed),
    the others a commutator with the z control (x <-> y, z killed).  A
    selection operator at every non-z site then keeps exactly the wanted
    letter, and the z sites are rotated back from y to z.
    """
    steps = []
    zsites = [s for s in range(1, m + 1) if word[s - 1] == "z"]
    for site in range(1, m + 1):
        letter = "x" if site in zsites else "z"
        steps.append(Step("comm", f"ctrl:{letter}@{site}"))
    for site in range(1, m + 1):
        if site in zsites:
            continue
        flipped = "y" if word[site - 1] == "x" else "x"
        steps.append(Step("sel", f"{flipped}{word[site - 1]}@{site}"))
    for site in zsites:
        steps.append(Step("comm", f"ctrl:x@{site}"))
    return steps


def word_order(m: int) -> list:
    """Words by increasing z count, lexicographic within a layer."""
    return sorted(enumerate_words(m), key=lambda w: (z_count(w), w))


def iso_label(j: int, k: int) -> str:
    return {1: "x", 0: "h", -1: "y"}[k] + str(j)


def decouple_interaction(model: ControlModel, tol: ToleranceConfig = DEFAULT_TOL,
                         ctx: ChainContext | None = None, strict: bool = False):
    """Certify every coupling term of the drift, layer by layer in z count.

    Returns the list of ``3**m`` certificates in layer order.  A certificate
    is *deferred* when its filter chain also passes the chain-coupling term
    (only the all-x word of a two-qubit chain); that term is then assembled
    from the solved single-generator elements instead.

    With ``strict=True`` a :class:`DecouplingError` names the first failing
    word.
    """
    n, m = model.n, model.m
    ctx = ctx or ChainContext(model)
    floor = np.sqrt(np.finfo(float).eps) * max(1.0, hs_norm(model.drift))
    chain_term = 1j * embed_accessor(n, model.accessor_hamiltonian.interaction)

    base = [Step("drift")]
    for site, w in enumerate(model.accessor.frequencies, start=1):
        base.append(Step("sub", f"ctrl:z@{site}", float(w)))

    certs = {}
    deferred = []
    for word in word_order(m):
        layer = z_count(word)
        filt = filter_steps(word, m)
        lower = [c for c in certs.values() if c.layer < layer]
        for c in deferred:
            leak = _linear_gain(filt, _word_probe(n, c.word), ctx)
            if hs_norm(leak) > floor:
                raise DecouplingError(f"deferred word {c.word!r} leaks into the chain of {word!r}")
        subs = [Step("sub", f"cert:{c.word}") for c in lower if not c.deferred]
        gain = _gain(filt, _word_probe(n, word), ctx)
        chain = [*base, *subs, *filt, Step("scale", coef=1.0 / gain)]
        nomial = nomial_of(model, word)
        leak = hs_norm(_linear_gain(filt, chain_term, ctx)) > floor
        if leak:
            cert = DecouplingCertificate(
                nomial, chain, execute_chain(chain, ctx), np.inf, 1.0 / gain, layer, deferred=True,
                note="filter chain also passes the chain coupling term; "
                     "assembled from solved single-generator elements")
            deferred.append(cert)
            certs[word] = cert
            continue
        produced = execute_chain(chain, ctx)
        res = _residual(produced, nomial.element, floor)
        cert = DecouplingCertificate(nomial, chain, produced, res, 1.0 / gain, layer,
                                     valid=res <= tol.verify_tol)
        certs[word] = cert
        ctx.certified[word] = produced

    if deferred:
        clean = [c for c in certs.values() if not c.deferred]
        try:
            isolated, _ = solve_system_components(clean, model.coupling, n, m, tol, ctx=ctx)
        except InfeasibleCouplingError as exc:
            for c in deferred:
                c.valid = False
                c.residual = float(np.inf)
                c.note += f"; unresolved: {exc}"
            isolated = None
        if isolated is not None:
            for c in deferred:
                chain = []
                for (j, k), g in zip(column_labels(n), _row(model.coupling, c.word, n)):
                    if g == 0:
                        continue
                    label = f"{iso_label(j, k)}@{c.word}"
                    ctx.isolated[label] = rotate_word(isolated[(j, k)], reference_word(m), c.word, n, ctx)
                    chain.append(Step("add", f"iso:{label}", float(g)))
                c.chain = chain
                c.scale = 1.0
                c.produced = execute_chain(chain, ctx)
                c.residual = _residual(c.produced, c.nomial.element, floor)
                c.valid = c.residual <= tol.verify_tol
                ctx.certified[c.word] = c.produced

    out = [certs[w] for w in word_order(m)]
    if strict:
        for c in out:
            if not c.valid:
                raise DecouplingError(
                    f"certificate for word {c.word!r} failed (residual {c.residual:.3g}); "
                    f"chain: {' '.join(str(s) for s in c.chain)}")
    return out


def _row(coupling: CouplingTensor, word: str, n: int) -> list:
    return [coupling.get(word, j, k) for (j, k) in column_labels(n)]


def layer_sizes(certificates) -> list:
    m = len(certificates[0].word)
    counts = [0] * (m + 1)
    for c in certificates:
        counts[c.layer] += 1
    return counts


# ---------------------------------------------------------------------------
# solving for single generators


def reference_word(m: int) -> str:
    return "x" * m


def rotation_steps(src: str, dst: str) -> list:
    steps = []
    for site, (a, b) in enumerate(zip(src, dst), start=1):
        if a == b:
            continue
        if "i" in (a, b):
            raise ValueError("cannot rotate identity letters with local controls")
        steps.append(Step("comm", f"ctrl:{rotation_control(a, b)}@{site}"))
    return steps


def rotate_word(element, src: str, dst: str, n: int, ctx: ChainContext) -> np.ndarray:
    """Move ``element`` from accessor word ``src`` to ``dst`` with local controls."""
    steps = rotation_steps(src, dst)
    if not steps:
        return np.array(element)
    gain = _gain(steps, _word_probe(n, src), ctx, _word_probe(n, dst))
    return _linear_gain([*steps, Step("scale", coef=1.0 / gain)], element, ctx)


@dataclass
class SolveReport:
    rank: int
    required: int
    words: list
    reference_word: str
    condition_number: float
    max_residual: float
    residuals: dict

    def to_dict(self):
        return {
            "rank": self.rank,
            "required": self.required,
            "rows_used": self.words,
            "reference_word": self.reference_word,
            "condition_number": self.condition_number,
            "max_residual": self.max_residual,
            "residuals": {f"{iso_label(j, k)}": r for (j, k), r in self.residuals.items()},
        }


def solve_system_components(certificates, coupling: CouplingTensor, n: int, m: int,
                            tol: ToleranceConfig = DEFAULT_TOL, ctx: ChainContext | None = None):
    """Isolate ``i s_j^k (x) P_ref`` from the certified nomials.

    All certified elements are rotated to the reference word ``x...x`` and
    combined with the pseudo-inverse of the coupling matrix (least squares
    over every available row).

    Returns ``(isolated, report)`` with ``isolated[(j, k)]`` a matrix.
    """
    if ctx is None:
        raise ValueError("a ChainContext of the model is required")
    ref = reference_word(m)
    g_full, words, cols = coupling_matrix(coupling, n, m)
    row_of = {w: i for i, w in enumerate(words)}
    usable = [c for c in certificates if not c.deferred and c.valid]
    rows = [row_of[c.word] for c in usable]
    g = g_full[rows, :]
    required = len(cols)
    rank = int(np.linalg.matrix_rank(g, tol=1e-9 * max(1.0, np.abs(g).max()))) if rows else 0
    if rank < required:
        raise InfeasibleCouplingError(f"infeasible: coupling rank {rank} < {required}")
    rotated = [rotate_word(c.produced, c.word, ref, n, ctx) for c in usable]
    coeffs = np.linalg.pinv(g)
    chev = chevalley(n)
    isolated, residuals = {}, {}
    for col, (j, k) in enumerate(cols):
        elem = sum(coeffs[col, r] * rotated[r] for r in range(len(usable)))
        target = 1j * np.kron(chev.s(j, k), pauli_word_matrix(ref))
        residuals[(j, k)] = hs_norm(elem - target) / hs_norm(target)
        isolated[(j, k)] = elem
    report = SolveReport(rank, required, [c.word for c in usable], ref,
                         float(np.linalg.cond(g)), max(residuals.values()), residuals)
    if report.max_residual > tol.verify_tol:
        raise DecouplingError(f"solve residual {report.max_residual:.3g} above tolerance")
    return isolated, report


# ---------------------------------------------------------------------------
# system and accessor families


@dataclass
class SystemExtraction:
    chevalley: dict = field(repr=False)        # label -> i s (x) 1
    scales: dict
    residuals: dict
    cartan: list = field(repr=False)           # i C (x) 1 for every Cartan basis element
    cartan_residuals: list
    closure_dimension: int

    def elements(self):
        return list(self.cartan)

    def to_dict(self):
        return {
            "count": len(self.cartan),
            "chevalley_scales": self.scales,
            "chevalley_residuals": self.residuals,
            "closure_dimension": self.closure_dimension,
            "max_cartan_residual": max(self.cartan_residuals),
        }


def _fit(produced, target):
    """Scalar ``s`` minimising ``|s produced - target|`` and the relative residual."""
    denom = hs_inner(produced, produced)
    if denom == 0:
        return 0.0, 1.0
    s = hs_inner(produced, target) / denom
    return s, hs_norm(s * produced - target) / hs_norm(target)


def extract_system_operators(isolated: dict, n: int, m: int,
                             tol: ToleranceConfig = DEFAULT_TOL) -> SystemExtraction:
    """Bare system generators from pairs of isolated elements sharing one word.

    ``[i x_j (x) P, i y_j (x) P]`` gives ``h_j (x) 1`` (P squares to one), and
    likewise for the other two pairs.  The prefactor and its sign are fitted
    numerically and reported.  The remaining su(n) directions come from the
    closure of the Chevalley elements on the system factor.
    """
    chev = chevalley(n)
    ident = np.eye(2**m)
    pairs = {"h": ("x", "y"), "y": ("h", "x"), "x": ("h", "y")}
    grade = {"x": 1, "h": 0, "y": -1}
    out, scales, residuals = {}, {}, {}
    for j in range(1, n):
        for lab, (a, b) in pairs.items():
            ea, eb = isolated[(j, grade[a])], isolated[(j, grade[b])]
            prod = commutator(ea, eb)
            target = 1j * np.kron(chev.s(j, grade[lab]), ident)
            s, r = _fit(prod, target)
            name = f"{lab}{j}"
            scales[name] = s
            residuals[name] = r
            if r > tol.verify_tol:
                raise DecouplingError(f"system operator {name} not recovered (residual {r:.3g})")
            out[name] = s * prod
    # system-factor closure
    small = [1j * s for s in chev.all()]
    sbasis, _ = generate_closure(small, tol=tol)
    cartan, cres = [], []
    for c in cartan_su_basis(n):
        ok, r = contains(sbasis, 1j * c, tol)
        if not ok:
            raise DecouplingError("Cartan completion failed")
        cartan.append(1j * embed_system(c, m))
        cres.append(r)
    return SystemExtraction(out, scales, residuals, cartan, cres, len(sbasis))


@dataclass
class AccessorExtraction:
    chain_term: np.ndarray = field(repr=False)
    chain_term_residual: float
    peeled: list = field(repr=False)
    peel_coefficients: list
    peel_errors: list
    closure_dimension: int
    family: list = field(repr=False)
    family_residual: float

    def to_dict(self):
        return {
            "chain_term_residual": self.chain_term_residual,
            "peel_coefficients": self.peel_coefficients,
            "peel_relative_errors": self.peel_errors,
            "closure_dimension": self.closure_dimension,
            "count": len(self.family),
            "max_family_residual": self.family_residual,
        }


def peel_chain_couplings(chain_term, model: ControlModel, ctx: ChainContext | None = None):
    """Split ``i H_A^I`` into its neighbour terms ``i 1 (x) sigma_x^j sigma_x^{j+1}``.

    The double commutator with ``i sigma_y^j`` keeps only the term on bond
    (j, j+1) and multiplies it by ``-4 c_j``.  Returns the elements and the
    measured coefficients.
    """
    n, m = model.n, model.m
    ctx = ctx or ChainContext(model)
    rest = np.array(chain_term)
    elements, coeffs = [], []
    for j, c in enumerate(model.accessor.chain_couplings, start=1):
        y = ctx.control("y", j)
        dbl = commutator(commutator(rest, y), y)
        bond = "i" * (j - 1) + "xx" + "i" * (m - j - 1)
        unit = 1j * embed_accessor(n, pauli_word_matrix(bond))
        kappa = hs_inner(unit, dbl) / hs_inner(unit, unit)
        elem = dbl / (-4.0 * float(c))
        elements.append(elem)
        coeffs.append(kappa)
        rest = rest - float(c) * elem
    return elements, coeffs, rest


def extract_accessor_operators(model: ControlModel, certificates, system: SystemExtraction,
                               tol: ToleranceConfig = DEFAULT_TOL,
                               ctx: ChainContext | None = None) -> AccessorExtraction:
    """All ``4**m - 1`` operators ``i 1 (x) P_w`` on the accessor.

    ``i H_A^I`` is what remains of the drift after removing the free chain
    terms, every certified nomial and ``i H_S (x) 1``; its bond terms are
    peeled off one by one and closed together with the local controls.
    """
    n, m = model.n, model.m
    ctx = ctx or ChainContext(model)
    if any(c == 0 for c in model.accessor.chain_couplings):
        raise DecouplingError("zero chain coupling")
    rest = drift_generator(model)
    for site, w in enumerate(model.accessor.frequencies, start=1):
        rest = rest - float(w) * ctx.control("z", site)
    for cert in certificates:
        rest = rest - cert.produced
    for eps, j in zip(model.system.partial_sums, range(1, n)):
        rest = rest - float(eps) * system.chevalley[f"h{j}"]
    expected = 1j * embed_accessor(n, model.accessor_hamiltonian.interaction)
    scale = max(1.0, hs_norm(expected))
    chain_res = hs_norm(rest - expected) / scale

    peeled, coeffs, leftover = peel_chain_couplings(rest, model, ctx)
    errors = [abs(k - (-4.0 * float(c))) / abs(4.0 * float(c))
              for k, c in zip(coeffs, model.accessor.chain_couplings)]

    # work on the accessor factor alone: 1_n (x) B -> B
    def acc(e):
        return np.einsum("iaib->ab", e.reshape(n, 2**m, n, 2**m)) / n

    gens = [acc(ctx.control(l, s)) for s in range(1, m + 1) for l in "xy"]
    gens += [acc(p) for p in peeled]
    abasis, _ = generate_closure(gens, tol=tol)
    family, worst = [], 0.0
    for w in enumerate_words(m, "ixyz"):
        if w == "i" * m:
            continue
        ok, r = contains(abasis, 1j * pauli_word_matrix(w), tol)
        worst = max(worst, r)
        family.append(1j * embed_accessor(n, pauli_word_matrix(w)))
    if len(abasis) != 4**m - 1:
        raise DecouplingError(f"accessor closure reached {len(abasis)} < {4**m - 1}")
    return AccessorExtraction(rest, chain_res, peeled, coeffs, errors, len(abasis), family, worst)


def coupled_family(n: int, m: int) -> list:
    """``i C (x) P_w`` for every Cartan basis element and non-identity word."""
    words = [w for w in enumerate_words(m, "ixyz") if w != "i" * m]
    return [1j * np.kron(c, pauli_word_matrix(w)) for c in cartan_su_basis(n) for w in words]


# ---------------------------------------------------------------------------
# audit


@dataclass
class AuditReport:
    n: int
    m: int
    counts: dict
    total: int
    target: int
    identity_holds: bool
    joint_dimension: int
    membership_residuals: dict
    verify_tol: float = DEFAULT_TOL.verify_tol

    @property
    def complete(self) -> bool:
        members_ok = all(r < self.verify_tol for r in self.membership_residuals.values())
        return self.identity_holds and self.joint_dimension == self.target and members_ok

    def to_dict(self):
        return {
            "counts": self.counts,
            "total": self.total,
            "target": self.target,
            "identity_holds": self.identity_holds,
            "joint_dimension": self.joint_dimension,
            "membership_residuals": self.membership_residuals,
            "complete": self.complete,
        }


def audit_identity(n: int, m: int) -> tuple:
    """``(n^2-1) + (n^2-1)(4^m-1) + (4^m-1)`` and ``(2^m n)^2 - 1``."""
    s, a = n * n - 1, 4**m - 1
    return s + s * a + a, (2**m * n) ** 2 - 1


def audit_generated_dimension(n: int, m: int, families: dict, reference: LieBasis | None = None,
                              tol: ToleranceConfig = DEFAULT_TOL) -> AuditReport:
    """Count the three families, check the counting identity and their joint rank.

    ``families`` maps ``"system"``, ``"coupled"`` and ``"accessor"`` to lists
    of matrices.  With a ``reference`` basis, each family's worst membership
    residual against it is reported as well.
    """
    total, target = audit_identity(n, m)
    counts = {k: len(v) for k, v in families.items()}
    expected = {"system": n * n - 1, "coupled": (n * n - 1) * (4**m - 1), "accessor": 4**m - 1}
    if counts != expected:
        raise DecouplingError(f"family sizes {counts} differ from {expected}")
    if total != target:
        raise DecouplingError("counting identity violated")
    d = n * 2**m
    joint = LieBasis(d)
    for name in ("system", "coupled", "accessor"):
        for e in families[name]:
            orthonormal_insert(joint, e, tol)
    residuals = {}
    if reference is not None:
        for name, elems in families.items():
            residuals[name] = max(contains(reference, e, tol)[1] for e in elems)
    return AuditReport(n, m, counts, sum(counts.values()), target, total == target,
                       len(joint), residuals, tol.verify_tol)


# ---------------------------------------------------------------------------
# whole procedure


@dataclass
class ProofResult:
    certificates: list
    solve: SolveReport | None
    system: SystemExtraction | None
    accessor: AccessorExtraction | None
    audit: AuditReport | None
    errors: list
    context: ChainContext = field(repr=False)

    @property
    def ok(self) -> bool:
        return not self.errors and all(c.valid for c in self.certificates) and \
            self.audit is not None and self.audit.complete

    def to_dict(self):
        return {
            "certificates": [c.to_dict() for c in self.certificates],
            "layer_sizes": layer_sizes(self.certificates),
            "solve": self.solve.to_dict() if self.solve else None,
            "system": self.system.to_dict() if self.system else None,
            "accessor": self.accessor.to_dict() if self.accessor else None,
            "audit": self.audit.to_dict() if self.audit else None,
            "errors": self.errors,
            "ok": self.ok,
        }


def run_proof(model: ControlModel, tol: ToleranceConfig = DEFAULT_TOL,
              reference: LieBasis | None = None, check_closure: bool = True) -> ProofResult:
    """Execute the full constructive argument on ``model``.

    Failures after the decoupling stage are collected in ``errors`` rather
    than raised.  With ``check_closure`` the audit families are also checked
    for membership in the numerically generated algebra.
    """
    ctx = ChainContext(model)
    certs = decouple_interaction(model, tol, ctx=ctx)
    errors = [f"certificate {c.word}: residual {c.residual:.3g}" for c in certs if not c.valid]
    solve = system = accessor = audit = None
    try:
        isolated, solve = solve_system_components(certs, model.coupling, model.n, model.m, tol, ctx=ctx)
        system = extract_system_operators(isolated, model.n, model.m, tol)
        if errors:
            raise DecouplingError("nomials not all certified; accessor step skipped")
        accessor = extract_accessor_operators(model, certs, system, tol, ctx=ctx)
        if reference is None and check_closure:
            reference, _ = generate_closure(closure_generators(model), tol=tol)
        families = {
            "system": system.cartan,
            "coupled": coupled_family(model.n, model.m),
            "accessor": accessor.family,
        }
        audit = audit_generated_dimension(model.n, model.m, families, reference, tol)
    except DecouplingError as exc:
        errors.append(str(exc))
    return ProofResult(certs, solve, system, accessor, audit, errors, ctx)


def expected_layer_sizes(m: int) -> list:
    return [layer_size(m, k) for k in range(m + 1)]
