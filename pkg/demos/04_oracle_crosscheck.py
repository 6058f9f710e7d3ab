"""Floating-point closure against exact rational closure.

The numerical closure decides linear independence with a tolerance.  For
small models the exact oracle redoes the computation over the Gaussian
rationals, so any disagreement points at a tolerance problem rather than a
modelling one.
"""
from collections import Counter

from accessorctl.config import random_rational_model
from accessorctl.exact import agreement_check

tally = Counter()
for seed in range(20):
    model = random_rational_model(2, 1 + seed % 2, seed, density=0.3)
    rep = agreement_check(model)
    tally[(rep.exact_dimension, rep.agree)] += 1
    print(f"seed {seed:2d}  m={model.m}  float {rep.numeric_dimension:3d}  exact {rep.exact_dimension:3d}"
          f"  of {rep.target}")

print({f"dim {d}": n for (d, _), n in sorted(tally.items())})
print("all agree:", all(ok for (_, ok) in tally))
