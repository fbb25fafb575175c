"""
Recovering a hidden state over F_3
==================================

A linear map on F_3^2 is watched through the quadratic output x1^2 + x2.
A short output record is enough to invert the dynamics, and a deadbeat
observer locks onto the true state after four steps.
"""

import numpy as np

from ffkoopman import build_reduction, load_example
from ffkoopman.estimation import (
    observability,
    recover_initial,
    render_observer_table,
    run_observer,
    synthesize_deadbeat_gain,
)

sys = load_example("obs3")
red = build_reduction(sys)
print("basis:", red.basis_strings())
print("K1 =\n", red.K1.a)
print("Gamma =", red.Gamma.a)

###############################################################################
# Observability: stack Gamma, Gamma K1, Gamma K1^2, ...
obs = observability(red)
print(obs.verdict())
print(obs.O.a)

###############################################################################
# Four output samples pin down the initial state
states, outs = sys.simulate((2, 0), 9)
z = [o[0] for o in outs]
print("outputs:", z)
print("recovered x(0):", recover_initial(red, z[:4]))

# A sequence no trajectory can produce gives an empty answer
print("recover (0,1,1,1):", recover_initial(red, [0, 1, 1, 1]))

###############################################################################
# Deadbeat observer: K1 - L Gamma must be nilpotent
design = synthesize_deadbeat_gain(red)
print("L =", design.L.a.ravel())
print("nilpotency index:", design.nilpotency_index)
closed = design.closed.a
print("(K1 - L Gamma)^4 =\n", np.linalg.matrix_power(closed, 4) % 3)

rows = run_observer(red, design.L, x0=(2, 0), steps=10, y_hat0=[0, 0, 0, 0])
print(render_observer_table(rows))
