"""
Long-run regime classification
==============================

classify() integrates past a transient, samples the stroboscopic sections,
and reports equilibrium, oscillation, rotation, rotation-oscillation,
chaotic, or undecided, with the periodic resonance indices r:q when found.
"""

from varpend import ClassifierConfig, Params, State, classify
from varpend.elliptic import solve_oscillatory_modulus

cfg = ClassifierConfig(transient_periods=300, sample_periods=200)

cases = {
    "weak pumping, small swing": (Params(0.05, 0.05, 1.1), State(0.4, 0.0, 0.0)),
    "strong pumping mid band": (Params(0.3, 0.05, 0.6), State(0.1, 0.0, 0.0)),
}
# a 1:2 subharmonic needs a seed near the resonant orbit; the unperturbed
# oscillation with period 2 excitation periods starts at (0, 2*omega*k)
om = 0.55
k = solve_oscillatory_modulus(om, 1, 2).k
cases["seeded 1:2 oscillation"] = (Params(0.054, 0.05, om),
                                   State(0.0, 2 * om * k, 0.0))
cases["seeded, more pumping"] = (Params(0.06, 0.05, 0.6),
                                 State(0.0, 2 * 0.6 * solve_oscillatory_modulus(
                                     0.6, 1, 2).k, 0.0))

for name, (p, init) in cases.items():
    label = classify(init, p, cfg)
    periodic = label.kind in ("oscillation", "rotation", "rotation-oscillation")
    tag = f"{label.kind} {label.r}:{label.q}" if periodic else label.kind
    print(f"{name:28s} -> {tag}")
