"""
Transients and indicator polynomials
====================================

A two-variable Boolean map with two fixed points and a transient chain.
Indicator functions of orbits and chains are themselves polynomials, and
the Koopman operator acts on them in a recognisable way.
"""

from ffkoopman import build_reduction, load_example
from ffkoopman.dynamics import analyze_structure, classify_state
from ffkoopman.koopman import full_koopman_matrix
from ffkoopman.oracle import all_states, brute_force_structure, chain_indicator, lemma_suite, orbit_indicator
from ffkoopman.polyfunc import Substitution

sys = load_example("d1")
for x in map(tuple, all_states(sys.n, sys.p)):
    mu, lam = classify_state(sys, x)
    print(f"{x} -> {sys.step(x)}   transient {mu}, cycle {lam}")

st = analyze_structure(build_reduction(sys))
print("fixed points from K1:", st.fixed_points)
print("nilpotency index:", st.nilpotency_index)

orc = brute_force_structure(sys)
print("chain roots:", orc.roots)

###############################################################################
# Indicator of the fixed point (1,1) is invariant under composition with F
psi = orbit_indicator(sys, (1, 1))
phi = Substitution(sys.updates)
print("orbit indicator:", psi, "   after one step:", phi(psi))

# Indicator of the chain rooted at (0,1) dies after as many steps as the chain is long
chi = chain_indicator(sys, (0, 1))
for k in range(3):
    print(f"Phi^{k} chi = {chi}")
    chi = phi(chi)

###############################################################################
# The full Koopman matrix on all four monomials and the structural checks
print(full_koopman_matrix(sys).a)
for line in lemma_suite(sys).lines():
    print(line)
