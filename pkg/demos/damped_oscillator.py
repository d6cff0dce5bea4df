# %% [markdown]
# Damped oscillator moments
# ==========================
# Relaxation of a coherent state under an overdamped Lindblad generator,
# computed three ways: closed-form moment propagation, the characteristic
# function, and a truncated Fock-basis integration.

# %%
import numpy as np

from lindblad_lab import charfun, fock, moments
from lindblad_lab.model import minimal_diffusion_model, validate

model = minimal_diffusion_model(m=1.0, omega=1.0, lam=0.4)
print(validate(model).classification)

# %%
alpha = 0.8 + 0.3j
w0 = charfun.coherent_moments(model, alpha, 0.0).as_array()
times = np.linspace(0.0, 8.0, 9)
closed = moments.trajectory(model, w0[:2], w0[2:], times)
snaps = fock.oracle_evolve(model, fock.coherent_state(alpha, 40), times)

print(f"{'t':>5} {'sigma_q':>10} {'sigma_qq':>10} {'oracle dev':>11}")
for s, snap in zip(closed, snaps):
    orc = fock.moments_from_rho(snap, model).as_array()
    dev = np.max(np.abs(orc - s.as_array()))
    print(f"{snap.t:5.2f} {s.as_array()[0]:10.6f} {s.as_array()[2]:10.6f} {dev:11.2e}")

# %%
# Minimal diffusion relaxes to the ground state.
print("asymptotic variances", moments.asymptotic_variances(model))
print("asymptotic energy", moments.asymptotic_energy(model))
