"""
Cycle structure of a Boolean biochemical network
=================================================

A six-variable Boolean network is lifted to a linear system over F_2.
The cycle lengths it can exhibit are read off the elementary divisors of
the reduced Koopman matrix and then compared with a brute-force count.
"""

from ffkoopman import analyze_structure, build_reduction, load_example
from ffkoopman.oracle import brute_force_structure

sys = load_example("biochem")
print(sys)

# The invariant subspace grown from the six coordinate functions
red = build_reduction(sys)
print("dimension N =", red.N)
for i, f in enumerate(red.basis_strings(), start=1):
    print(f"  psi{i:<3d}{f}")

# Spectral data of K1
st = analyze_structure(red)
print("minimal polynomial:", st.min_poly_string())
print("elementary divisors:", ", ".join(f"({d.base})^{d.multiplicity}" for d in st.elementary_divisors))
print("possible cycle lengths:", sorted(st.predicted_orbit_lengths))
print("longest transient is at most", st.nilpotency_index)

# 64 states is nothing for brute force, so check the prediction directly
orc = brute_force_structure(sys)
print("observed cycle lengths:", orc.orbit_lengths)
print("observed longest transient:", orc.max_chain)
assert orc.distinct_orbit_lengths <= st.predicted_orbit_lengths

# Representative states on each cycle
for rep, length in zip(orc.cycle_reps, orc.orbit_lengths):
    print(f"  cycle of length {length:2d} through {rep}")
