"""A coupling that looks rich enough but is not.

If the system-accessor coupling uses only x and y accessor letters and only
the raising and lowering system operators, the generated algebra for a
qubit plus one accessor stays inside a ten-dimensional subalgebra
isomorphic to sp(4), so the pair is never fully controllable.  Adding a
single diagonal term breaks the symmetry.
"""
from accessorctl import controllability_verdict
from accessorctl.config import SplitMix64, load_config
from accessorctl.model import AccessorSpec, ControlModel, CouplingTensor, SystemSpec

_, model, _ = load_config("builtin:xy_only_sp4")
print("reference member:", controllability_verdict(model).dimension)

for seed in range(5):
    g = SplitMix64(seed)
    coupling = CouplingTensor({(w, 1, k): g.uniform() for w in "xy" for k in (1, -1)})
    member = ControlModel(SystemSpec((g.uniform(), g.uniform())), AccessorSpec((g.uniform(),)), coupling)
    print(f"seed {seed}: dimension {controllability_verdict(member).dimension}")

entries = dict(model.coupling.items())
entries[("z", 1, 0)] = 0.5
broken = ControlModel(model.system, model.accessor, CouplingTensor(entries))
print("with a z-h term added:", controllability_verdict(broken).dimension)
