"""
Two marginals, and the real line
================================

With two marginals every vertex of the transport polytope is a permutation,
so the LP returns a Monge coupling.  On the line, matching sorted atoms is
optimal for any number of marginals.
"""

import numpy as np

from mmot import assignment_cost, build_tensor, enumerate_mmc, make_instance, monotone_1d, solve_lp

rng = np.random.default_rng(1)

# Two marginals: the LP vertex is a scaled permutation matrix
inst = make_instance(rng.normal(size=(2, 5, 3)))
lp = solve_lp(inst)
print("N=2 support:", lp.coupling.support())
print(f"LP {lp.value:.6f}  MMC {enumerate_mmc(inst).mmc:.6f}")

# One dimension: sort and match
inst = make_instance(rng.normal(size=(3, 5, 1)))
a = monotone_1d(inst)
t = build_tensor(inst)
print(f"d=1 monotone {assignment_cost(inst, t, a):.6f}  LP {solve_lp(inst, t).value:.6f}")
