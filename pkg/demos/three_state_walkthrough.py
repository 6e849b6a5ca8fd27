"""Walk through the three-state reconstruction at one detuned setting.

The rms error of an apparatus measuring o_a.sigma instead of A = a.sigma
is fixed by <O_A> in three preparations: psi, A psi and (A+1) psi.  No
tomography of the post-measurement state is needed, and the same three
expectation values could come from measured count ratios.
"""

import math

import numpy as np

from errdisturb import qmcore, spin, threestate

a = qmcore.X_AXIS
b = qmcore.Y_AXIS
psi = qmcore.state_from_angles(0.0, 0.0)      # |+z>
phi_oa = math.pi / 5                          # detuning in the equator plane
o_a = qmcore.axis_from_angles(math.pi / 2, phi_oa)

obs_a = qmcore.pauli_dot(a)
out_obs = qmcore.pauli_dot(o_a)

states = threestate.auxiliary_states(obs_a, psi)
print("preparations for the error of an apparatus detuned by phi =",
      f"{math.degrees(phi_oa):.1f} deg:")
print("  base        ", np.round(states.base, 6))
print("  transformed ", np.round(states.transformed, 6),
      f" norm {states.norm_transformed:.6f}")
print("  shifted     ", np.round(states.shifted, 6),
      f" norm {states.norm_shifted:.6f}")
print(f"  filtering success probability {states.success_probability:.4f}")

e_base = qmcore.expectation(out_obs, states.base)
e_t = qmcore.expectation(out_obs, states.transformed)
e_s = qmcore.expectation(out_obs, states.shifted)
print(f"\n<O_A> in the three states: {e_base:+.6f} {e_t:+.6f} {e_s:+.6f}")

eps = threestate.estimate_error(e_base, e_t, e_s,
                                states.norm_transformed, states.norm_shifted)
print(f"reconstructed eps  {eps:.12f}")
print(f"closed form        {float(spin.error_exact(a, o_a)):.12f}")
print(f"  (2 sin(phi/2) =  {2 * math.sin(phi_oa / 2):.12f})")

# disturbance side: the modified observable O_B = P+ B P+ + P- B P-
obs_b = qmcore.pauli_dot(b)
proj_p = 0.5 * (np.eye(2) + out_obs)
proj_m = 0.5 * (np.eye(2) - out_obs)
mod_obs = proj_p @ obs_b @ proj_p + proj_m @ obs_b @ proj_m

eta = threestate.disturbance_from_operators(mod_obs, obs_b, psi)
print(f"\nreconstructed eta  {eta:.12f}")
print(f"closed form        {float(spin.disturbance_exact(b, o_a)):.12f}")
print(f"  (sqrt(2) cos(phi) = {math.sqrt(2) * math.cos(phi_oa):.12f})")
