"""
Concentration as the mass approaches rho*
=========================================

Run the default sweep and compare the minimizers with their predicted
blow-up behaviour.  Takes around twenty seconds.
"""

from planarsp import cached_profile, centering_check, run_sweep
from planarsp.asymptotics import DEFAULT_FRACS
from planarsp.svgplot import line_chart

p = cached_profile()
rows = run_sweep(DEFAULT_FRACS, profile=p)

print(" frac   eps_bar/pred   e gap    mu eps^2 rho*   |w-Q|/q0   slope")
for r in rows:
    print(f" {r.rho_frac:.2f}   {r.eps_bar / r.eps_bar_pred:10.4f}  "
          f"{abs(r.e - r.e_pred) / abs(r.e_pred):7.4f}   {r.mu_eps2 * p.mass:10.4f}   "
          f"{r.profile_dist_inf / p.q0:8.4f}   {r.decay_slope:6.3f}")

###############################################################################
# The multiplier approaches -1/rho* slowly; the leading correction carries a
# logarithm, which is why mu eps^2 rho* is still about -1.10 at 0.99 rho*.

print(centering_check(rows))

fr = [r.rho_frac for r in rows]
svg = line_chart(
    [("e", fr, [r.e for r in rows], False), ("asymptote", fr, [r.e_pred for r in rows], True)],
    "minimal energy", "rho / rho*", "e",
)
with open("blowup_energy.svg", "w") as f:
    f.write(svg)
