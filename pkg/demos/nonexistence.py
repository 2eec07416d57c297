"""
No minimizer at the critical mass
=================================

At rho = rho* the concentrating family u_tau(x) = tau Q(tau x) sends the
energy to minus infinity, so there is no minimizer for the flow to settle on.
"""

from planarsp import cached_profile, nonexistence_probe

p = cached_profile()
rep = nonexistence_probe(p.mass, taus=(1, 2, 4, 8), profile=p)
for tau, e in zip((1, 2, 4, 8), rep["energies"]):
    print(f"tau = {tau}:  E(u_tau) = {e:.6f}")
print("strictly decreasing:", rep["strictly_decreasing"])
print("total drop        :", round(rep["total_drop"], 4))
for note in rep["notes"]:
    print("note:", note)

###############################################################################
# The drop is logarithmic in tau: each doubling lowers the energy by about
# (rho*^2 / 4) ln 2 minus the shrinking external term.

print("gaps:", [round(g, 4) for g in rep["gaps"]])
