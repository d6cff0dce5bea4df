# %% [markdown]
# Tunneling decay through a barrier
# ==================================
# Tunneling part of the summed rate of a closed system against the
# golden-rule value, then the same barrier with dissipation switched on.
# The overlap terms C and F are reported separately from the tunneling term G.

# %%
import numpy as np

from lindblad_lab import tunnel

closed, elems = tunnel.gamow_preset(dissipative=False)
golden = tunnel.golden_rule_rate(elems)
for t in (2.0, 5.0, 10.0):
    rate = tunnel.summed_rate(closed, elems, t)
    print(f"t={t:5.1f}  G/golden = {rate['G'] / golden:.5f}  C = {rate['C']:.4f}")

# %%
model, elems = tunnel.gamow_preset(dissipative=True)
for t in (2.0, 5.0, 10.0):
    rate = tunnel.summed_rate(model, elems, t)
    print(f"t={t:5.1f}  G = {rate['G']:.6e}  total = {rate['total']:.6e}")

# %%
# Dekker's inverted-oscillator transmission factor against the Lindblad one.
for r, k_d, k_l in tunnel.dekker_table():
    print(f"lam/omega_b={r:4.2f}  kappa_dekker={k_d:.6f}  kappa_lindblad={k_l:.6f}")
