"""Locate where the product form eps*eta fails and find the threshold latitude.

On each latitude circle theta_OA the product form either holds for all
azimuths or fails on intervals around phi = 0, pi/2 and 3pi/2.  Bisection
on "fulfilled everywhere" gives the critical latitude, arcsin(3/4).
"""

import math

from errdisturb import qmcore, sweep

a, b = qmcore.X_AXIS, qmcore.Y_AXIS
psi = qmcore.state_from_angles(0.0, 0.0)

for deg in (20, 40, 48, 49, 60, 90):
    rep = sweep.violation_analysis(a, b, psi, math.radians(deg))
    if rep.fulfilled_everywhere:
        print(f"theta_OA = {deg:3d} deg: product form holds on the whole circle"
              f" (min margin {rep.min_margin:+.4f})")
        continue
    spans = ", ".join(
        f"[{math.degrees(lo):6.1f}, {math.degrees(hi):6.1f}]"
        for lo, hi in rep.violated_intervals
    )
    print(f"theta_OA = {deg:3d} deg: violated on {spans} deg"
          f" (min margin {rep.min_margin:+.4f} at phi = {math.degrees(rep.phi_at_min):.1f})")

theta_star = sweep.violation_threshold(a, b, psi)
print(f"\nthreshold latitude {math.degrees(theta_star):.4f} deg;"
      f" arcsin(3/4) = {math.degrees(math.asin(0.75)):.4f} deg")
