"""
The ground state Q and the critical mass
========================================

Shoot the radial ground state, check its Pohozaev-type identities and save a
plot of the profile next to its exponential tail.
"""

import numpy as np

from planarsp import shoot_Q
from planarsp.svgplot import line_chart

p = shoot_Q()
print(f"q0   = Q(0)     = {p.q0:.10f}")
print(f"rho* = ||Q||^2  = {p.mass:.10f}")
print(f"kinetic / mass  = {p.kinetic / p.mass:.10f}")
print(f"quartic / mass  = {p.quartic / p.mass:.10f}")
print(f"C_Q             = {p.C_Q:.10f}")

###############################################################################
# The tail: Q decays like exp(-r)/sqrt(r), so log(Q sqrt(r)) + r levels off.

r = np.linspace(0.5, 12, 60)
q = p(r)
print("levelled tail  :", np.round(np.log(q[-5:] * np.sqrt(r[-5:])) + r[-5:], 4))

svg = line_chart(
    [("Q(r)", r, q, False), ("q0 exp(-r)", r, p.q0 * np.exp(-r), True)],
    "radial ground state", "r", "Q",
)
with open("ground_state.svg", "w") as f:
    f.write(svg)
