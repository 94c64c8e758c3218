"""
Three planar marginals without a Monge solution
===============================================

Three uniform measures on three points each in the plane.  The optimal
coupling splits mass (six atoms of weight 1/6), and every one of the 36
deterministic couplings costs strictly more.
"""

from mmot import build_tensor, enumerate_mmc, extract_barycenter, solve_lp
from mmot.fixtures import counterexample
from mmot.simplex import Mode

inst = counterexample()
tensor = build_tensor(inst)

# Solve the LP over the transport polytope (27 variables, 7 independent rows)
lp = solve_lp(inst, tensor)
print(f"optimal cost   {lp.value:.5f}  ({lp.iterations} pivots)")
for alpha in lp.coupling.support():
    print("   ", tuple(a + 1 for a in alpha), f"{lp.coupling.entries[alpha]:.4f}")

# Best deterministic coupling, by brute force over (3!)^2 maps
monge = enumerate_mmc(inst, tensor)
print(f"minimal Monge  {monge.mmc:.5f}  over {monge.enumerated} maps")
print("    support", [tuple(a + 1 for a in t) for t in monge.best.tuples()])

# The same comparison in rational arithmetic: the gap is a strictly positive fraction
exact = build_tensor(inst, exact=True)
gap = enumerate_mmc(inst, exact).mmc - solve_lp(inst, exact, Mode.EXACT).value
print(f"exact gap      {gap}  (~{float(gap):.4e})")

# Pushing the optimal coupling through the mean map gives a 6-atom barycenter,
# so no barycenter with three equal atoms exists for these marginals.
bary = extract_barycenter(inst, lp.coupling)
print(f"barycenter: {bary.size} atoms, functional {bary.functional_value:.5f} = cost / 3")
