"""Single-atom self-ordering in a transversally pumped ring cavity.

Two models of the same system side by side:

* a full quantum Lindblad treatment on a truncated momentum-ladder (x) Fock
  composite space (hilbert, model, quantum_dynamics, steady_state,
  observables, effective_potential), and
* the factorized mean-field limit (meanfield),

so that their qualitative disagreements (runaway acceleration vs. quantum-
stabilized drift, staggered ordering thresholds, annular field states) can be
computed and exported from one command-line tool (cli).
"""

__version__ = "0.1.0"
