"""Dynamical Lie algebra by breadth-first commutator closure."""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    DEFAULT_TOL,
    DimensionError,
    LieBasis,
    ToleranceConfig,
    as_matrix,
    check_element,
    orthonormal_insert,
    project_traceless,
    to_real_vector,
)
from .model import ControlModel, check_size_condition, control_generators, coupling_rank_check, drift_generator

CONTROLLABLE = "controllable"
NOT_CONTROLLABLE = "not_controllable"


@dataclass
class ClosureReport:
    dimension: int
    target: int
    verdict: str
    rounds: int
    commutators_evaluated: int
    wall_time: float
    workers: int = 1
    condition_results: dict | None = None
    basis: LieBasis | None = field(default=None, repr=False)

    def to_dict(self, timing=True):
        out = {
            "dimension": self.dimension,
            "target": self.target,
            "verdict": self.verdict,
            "rounds": self.rounds,
            "commutators_evaluated": self.commutators_evaluated,
            "workers": self.workers,
        }
        if self.condition_results is not None:
            out["conditions"] = self.condition_results
        if timing:
            out["wall_time"] = self.wall_time
        return out


def _batch_commutators(f, stack):
    return f[None, :, :] @ stack - stack @ f[None, :, :]


def generate_closure(generators, cap: int | None = None, tol: ToleranceConfig = DEFAULT_TOL,
                     workers: int = 1):
    """Span of all nested commutators of ``generators``.

    Generators are projected onto their traceless part and inserted as
    seeds.  Each round commutes every element accepted in the previous round
    (the frontier) with every element present when the round starts, in
    ascending (frontier index, partner index) order, and tries to insert the
    result.  The loop ends when a round adds nothing or the basis reaches
    ``cap`` (default ``d**2 - 1``).

    Commutators of one frontier element may be computed on worker threads;
    insertion is always serial in the same order, so the result does not
    depend on ``workers``.

    Returns ``(basis, report)``.
    """
    start = time.perf_counter()
    generators = [as_matrix(g) for g in generators]
    if not generators:
        raise ValueError("empty generator list")
    d = generators[0].shape[0]
    for g in generators:
        if g.shape[0] != d:
            raise DimensionError(f"dimension mismatch: {g.shape[0]} vs {d}")
    generators = [check_element(project_traceless(g), tol) for g in generators]
    target = d * d - 1
    cap = target if cap is None else min(cap, target)

    basis = LieBasis(d)
    for g in generators:
        if len(basis) >= cap:
            break
        if np.linalg.norm(g) == 0:
            continue
        orthonormal_insert(basis, g, tol, source="seed")

    frontier = list(range(len(basis)))
    rounds = evaluated = 0
    # cheap block rejection; anything near the threshold goes through the full insert
    prefilter = 0.1 * tol.independence_tol
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while frontier and len(basis) < cap:
            rounds += 1
            snapshot = basis.stack()
            in_frontier = set(frontier)
            partners = {
                p: [q for q in range(len(snapshot)) if q < p or q not in in_frontier]
                for p in frontier
            }

            def work(p):
                qs = partners[p]
                return _batch_commutators(snapshot[p], snapshot[qs])

            batches = pool.map(work, frontier) if pool else map(work, frontier)
            new = []
            for p, comms in zip(frontier, batches):
                qs = partners[p]
                evaluated += len(qs)
                if not qs or len(basis) >= cap:
                    continue
                vecs = np.array([to_real_vector(c) for c in comms])
                norms = np.linalg.norm(vecs, axis=1)
                # parents have unit norm, so a commutator this small is rounding noise
                live = norms > tol.independence_tol
                vecs[live] /= norms[live, None]
                rows = basis.rows
                resid = vecs - (vecs @ rows.T) @ rows
                keep = live & (np.linalg.norm(resid, axis=1) > prefilter)
                for idx in np.flatnonzero(keep):
                    res = orthonormal_insert(basis, comms[idx], tol, source=(p, qs[idx]))
                    if res.accepted:
                        new.append(res.index)
                        if len(basis) >= cap:
                            break
            frontier = new
    finally:
        if pool:
            pool.shutdown()

    report = ClosureReport(
        dimension=len(basis),
        target=target,
        verdict=CONTROLLABLE if len(basis) == target else NOT_CONTROLLABLE,
        rounds=rounds,
        commutators_evaluated=evaluated,
        wall_time=time.perf_counter() - start,
        workers=workers,
        basis=basis,
    )
    return basis, report


def contains(basis: LieBasis, element, tol: ToleranceConfig = DEFAULT_TOL):
    """Whether ``element`` lies in the span of ``basis``.

    Returns ``(inside, relative_residual)``.
    """
    element = as_matrix(element)
    if element.shape[0] != basis.dim_ambient:
        raise DimensionError(f"dimension mismatch: {element.shape[0]} vs {basis.dim_ambient}")
    v = to_real_vector(element)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return True, 0.0
    r = basis.projection_residual(v / norm)
    residual = float(np.linalg.norm(r))
    return residual < tol.verify_tol, residual


def closure_generators(model: ControlModel) -> list:
    """``i H_0`` (traceless part) followed by the control generators."""
    return [drift_generator(model), *control_generators(model)]


def controllability_verdict(model: ControlModel, tol: ToleranceConfig = DEFAULT_TOL,
                            workers: int = 1, cap: int | None = None) -> ClosureReport:
    size = check_size_condition(model.n, model.m)
    rank = coupling_rank_check(model.coupling, model.n, model.m)
    _, report = generate_closure(closure_generators(model), cap=cap, tol=tol, workers=workers)
    report.condition_results = {"size": size.to_dict(), "rank": rank.to_dict()}
    return report
