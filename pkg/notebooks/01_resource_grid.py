"""
The LTE frame as a resource grid
================================

One 10 ms FDD frame at 10 MHz is 600 subcarriers by 140 OFDM symbols.
Every RE carries exactly one channel label.
"""

# %%
import numpy as np

from ltelab.grid import CellConfig, ChannelKind, build_dl_grid, build_ul_grid, occupancy_table

cell = CellConfig(bandwidth_rb=50, cell_id=0)
dl = build_dl_grid(cell)
print(dl.shape, dl.n_total)

# %% occupancy per channel
for name, (count, frac) in occupancy_table(dl).items():
    print(f"{name:<7} {count:>6} {frac:8.4%}")

# %% where the sync signals sit: central 62 subcarriers, symbols 5/6 and 75/76
sc, sym = np.nonzero(dl.mask(ChannelKind.PSS) | dl.mask(ChannelKind.SSS))
print("symbols", sorted(set(sym)), "subcarriers", sc.min(), "..", sc.max())

# %% a crude ASCII map of subframe 0 around DC (rows are subcarriers, high to low)
glyph = {k: c for k, c in zip(ChannelKind, "PSBfCcDuU")}
for k in range(335, 263, -4):
    print("".join(glyph[ChannelKind(v)] for v in dl.labels[k, :14]))

# %% the uplink split: PUCCH at the band edges, PUSCH in between
ul = build_ul_grid(cell)
for name, (count, frac) in occupancy_table(ul).items():
    print(f"{name:<7} {count:>6} {frac:8.4%}")
