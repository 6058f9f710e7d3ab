"""A qubit controlled only through one accessor qubit.

The system is a two-level atom that we cannot drive.  We can drive a single
accessor qubit, and the two talk through a fixed x/y/z coupling.  Asking
whether every unitary on the joint four-dimensional space is reachable
amounts to asking whether the control generators span su(4), which has
dimension 15.
"""
from accessorctl import check_size_condition, controllability_verdict, coupling_rank_check
from accessorctl.config import load_config
from accessorctl.exact import agreement_check

_, model, tol = load_config("builtin:two_level_diag")

print("system dim", model.n, " accessor qubits", model.m, " joint dim", model.dim)
print("coupling entries:")
for (word, j, k), g in model.coupling.items():
    print(f"  word {word}  level pair {j}  grade {k:+d}  g = {g}")

# Both necessary-looking conditions are cheap to check before any closure.
print("size condition:", check_size_condition(model.n, model.m).to_dict())
print("coupling rank:", coupling_rank_check(model.coupling, model.n, model.m).to_dict()["rank"])

report = controllability_verdict(model, tol)
print(f"closure dimension {report.dimension} of {report.target}: {report.verdict}"
      f" ({report.rounds} rounds, {report.commutators_evaluated} commutators)")

# The same answer from exact rational arithmetic, with no tolerance at all.
agree = agreement_check(model)
print("exact dimension", agree.exact_dimension, "agrees:", agree.agree)
