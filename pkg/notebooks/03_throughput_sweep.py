"""
Throughput under each scenario
==============================

The link model turns per-RE SINR into DL/UL throughput. The clean cell is
calibrated to 12/8 Mbps.
"""

# %%
from ltelab.harness import DENSE_ISR_POINTS_DB, RunConfig, plotdata, run_scenario, sweep
from ltelab.interference import InterferenceScenario

records = sweep(RunConfig())
for r in records:
    print(f"{r.scenario.label:<24} {r.isr_re_db:5.1f} dB  DL {r.report.dl_mbps:6.3f}  "
          f"UL {r.report.ul_mbps:6.3f}  sync_lost={r.report.sync_lost}")

# %% sync interference is cheap: compare with full-band at the same frame energy
for isr in (0.0, 5.0):
    sync, m = run_scenario(RunConfig(), InterferenceScenario.of(6), isr)
    full, _ = run_scenario(RunConfig(), InterferenceScenario.of(1), m.isr_f_db)
    print(f"ISR_F {m.isr_f_db:6.2f} dB: sync DL loss {sync.dl_degradation:.1%}, "
          f"full-band DL loss {full.dl_degradation:.1%}")

# %% dense sweep, DL series per scenario
dense = plotdata(sweep(RunConfig(isr_re_sweep_db=DENSE_ISR_POINTS_DB)))
for name, s in dense.items():
    print(name, " ".join(f"{v:5.2f}" for v in s["dl_mbps"]))
