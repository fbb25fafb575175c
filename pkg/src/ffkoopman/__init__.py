"""Koopman linear representations of finite state systems over prime fields.

A polynomial map F on F_p^n acts on functions by composition.  The smallest
invariant function space containing the coordinates (and outputs) gives a
linear system x -> K1 x whose algebra answers questions about F: fixed
points, cycle lengths, chain bounds, observability and observer design.
"""

from .dynamics import StructureReport, analyze_structure, classify_state, fixed_points, periodic_points
from .errors import FssError
from .estimation import (
    observability,
    recover_initial,
    decompose_observable,
    run_observer,
    synthesize_deadbeat_gain,
)
from .ffla import MatrixFp, UniPoly
from .field import FieldSpec
from .koopman import KoopmanReduction, build_reduction, full_koopman_matrix, psi_hat
from .oracle import brute_force_observability, brute_force_structure, lemma_suite
from .polyfunc import PolyFunc, coordinate, constant
from .sysdef import FssSystem, load_example, load_system, parse_system, render_system

__version__ = "0.1.0"

__all__ = [
    "FieldSpec", "PolyFunc", "coordinate", "constant",
    "FssSystem", "parse_system", "render_system", "load_system", "load_example",
    "MatrixFp", "UniPoly",
    "KoopmanReduction", "build_reduction", "full_koopman_matrix", "psi_hat",
    "StructureReport", "analyze_structure", "fixed_points", "periodic_points", "classify_state",
    "observability", "recover_initial", "decompose_observable", "synthesize_deadbeat_gain", "run_observer",
    "brute_force_structure", "brute_force_observability", "lemma_suite",
    "FssError",
]
