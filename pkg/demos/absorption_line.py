# %% [markdown]
# Absorption line of a two-level atom with environment
# ======================================================
# The steady-state absorption coefficient over detuning, and the
# equivalent Lorentzian width compared with its closed form.

# %%
import numpy as np

from lindblad_lab import optics

model = optics.AtomEnvModel(
    gamma_perp_prime=0.5,
    gamma_perp_dblprime=1.0,
    gamma_parallel=1.0,
    gamma1=0.4,
    gamma2=0.01,
    chi0=0.0,
    chi1=1e-3,
    omega0=100.0,
    omega=100.0,
)
print(optics.derived(model))

# %%
delta = np.linspace(-6.0, 6.0, 13)
spec = optics.absorption_spectrum(model, delta)
for d, a in zip(spec["delta"], spec["alpha"]):
    print(f"delta={d:5.1f}  alpha={a: .6e}")

# %%
width, shift = optics.line_shape(model)
print(f"closed-form width {width:.6f}, quadrature width {optics.line_width_quadrature(model):.6f}")
