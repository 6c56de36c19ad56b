"""
Interference footprints and frame-level ISR
===========================================

A jammer that targets a fraction of the REs spends that fraction of the
energy: ISR_F = ISR_RE + 10 log10(fraction).
"""

# %%
from ltelab.grid import CellConfig, build_dl_grid, build_ul_grid
from ltelab.harness import RunConfig, table2
from ltelab.interference import InterferenceScenario, footprint_for_scenario, isr_f

dl, ul = build_dl_grid(CellConfig()), build_ul_grid(CellConfig())

# %% fraction of the frame each scenario touches
for row in table2(RunConfig()):
    print(f"{row['label']:<24} {row['fraction']:8.4%} {row['isr_f_minus_isr_re_db']:7.2f} dB")

# %% the exact PSS/SSS core is smaller than the reported 1.23 %
exact = footprint_for_scenario(InterferenceScenario.of(6), dl, mode="grid-exact")
reported = footprint_for_scenario(InterferenceScenario.of(6), dl)
print(exact.n_target, reported.n_target, f"{exact.fraction:.4%} vs {reported.fraction:.4%}")

# %% energy cost of hitting PUSCH instead of the whole band, and PUCCH vs sync
print("FullBand - PUSCH:", isr_f(0, 1.0) - isr_f(0, 0.75))
print("PUCCH - PSS/SSS:", isr_f(0, 0.25) - isr_f(0, reported.fraction))
