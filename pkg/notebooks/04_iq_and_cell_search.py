"""
From grid to baseband IQ, and back
==================================

Synthesize two frames of a cell at 15.36 Msps, delay them, and let the
receiver find PSS timing and the cell identity again.
"""

# %%
import tempfile
from pathlib import Path

import numpy as np

from ltelab.grid import CellConfig, build_dl_grid
from ltelab.iq import acquire_sync, read_iq, synthesize_iq, write_iq

grid = build_dl_grid(CellConfig(cell_id=301))
x = synthesize_iq(grid, frames=2, seed=1)
print(x.size, "samples, mean power", np.mean(np.abs(x) ** 2))

# %% an unknown delay
delay = 48_211
state = acquire_sync(np.roll(x, delay), 50)
print(state)
print("timing recovered:", state.within(delay, tolerance=2, frame_length=153600))

# %% write and read the cf32 file
path = Path(tempfile.mkdtemp()) / "cell301.iq"
write_iq(path, x, {"sample_rate": 15.36e6, "frames": 2, "scenario": "clean", "isr_re_db": 0.0})
back, meta = read_iq(path)
print(meta, np.max(np.abs(back - x)))
