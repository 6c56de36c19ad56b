"""Threshold-gate link abstraction: per-RE SINR -> control gates -> throughput.

The model is calibrated so the clean cell delivers exactly the nominal
rates. Degradation enters through four channels:

* data REs whose effective SINR drops below ``data_sinr_threshold_db``;
* PCFICH/PDCCH mean SINR below their thresholds, which zeroes a subframe;
* CRS corruption, added as noise to the data REs of the same RB (averaged
  over the frame, like a time-filtered channel estimator);
* a continuous sync penalty driven by the PSS/SSS SINR, with a hard
  sync-loss floor below which the link is dropped.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import (
    SUBCARRIERS_PER_RB,
    SUBFRAMES_PER_FRAME,
    SYMBOLS_PER_SUBFRAME,
    ChannelKind,
    Direction,
    ResourceGrid,
)
from .interference import InterferenceScenario, ScenarioKind


def db(x):
    return 10.0 * np.log10(x)


def lin(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def _default_control_thresholds():
    return {"PCFICH": 0.0, "PDCCH": 0.0, "PBCH": 0.0, "PUCCH": 0.0}


@dataclass(frozen=True)
class LinkConfig:
    noise_floor_db: float = -20.0
    data_sinr_threshold_db: float = 3.0
    control_sinr_threshold_db: dict = field(default_factory=_default_control_thresholds)
    crs_penalty_gain: float = 1.0
    sync_penalty_gain: float = 0.1
    sync_loss_floor_db: float = -12.0
    pucch_slope_db: float = 1.0
    capture_threshold_db: float = 3.0
    nominal_dl_mbps: float = 12.0
    nominal_ul_mbps: float = 8.0

    def __post_init__(self):
        thresholds = {**_default_control_thresholds(), **dict(self.control_sinr_threshold_db)}
        object.__setattr__(self, "control_sinr_threshold_db", thresholds)
        finite = [self.noise_floor_db, self.data_sinr_threshold_db, self.sync_loss_floor_db,
                  self.capture_threshold_db, *thresholds.values()]
        if not all(math.isfinite(v) for v in finite):
            raise ValueError("link thresholds must be finite")
        if self.nominal_dl_mbps <= 0 or self.nominal_ul_mbps <= 0:
            raise ValueError("nominal rates must be positive")
        if self.crs_penalty_gain < 0 or self.sync_penalty_gain < 0:
            raise ValueError("penalty gains must be non-negative")
        if self.pucch_slope_db <= 0:
            raise ValueError("pucch_slope_db must be positive")

    @property
    def noise(self) -> float:
        return 10.0 ** (self.noise_floor_db / 10.0)

    def threshold(self, kind: str) -> float:
        return self.control_sinr_threshold_db[kind]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LinkConfig":
        return cls(**d)


@dataclass(frozen=True)
class SubframeOutcome:
    subframe_index: int
    control_ok: bool
    decodable_fraction: float
    sync_quality: float | None = None
    sync_penalty: float = 1.0

    @property
    def contribution(self) -> float:
        return float(self.control_ok) * self.decodable_fraction * self.sync_penalty


@dataclass(frozen=True)
class ThroughputReport:
    scenario: InterferenceScenario | None
    dl_mbps: float
    ul_mbps: float
    nominal_dl_mbps: float = 12.0
    nominal_ul_mbps: float = 8.0
    gates_tripped: dict = field(default_factory=dict)
    sync_lost: bool = False
    sync_quality_db: float = float("nan")
    pucch_failure_rate: float = 0.0
    pbch_ok: bool = True
    subframes: tuple = ()

    @property
    def dl_degradation(self) -> float:
        return 1.0 - self.dl_mbps / self.nominal_dl_mbps

    @property
    def ul_degradation(self) -> float:
        return 1.0 - self.ul_mbps / self.nominal_ul_mbps

    @property
    def degradation_fraction(self) -> float:
        """Combined DL+UL shortfall relative to the combined nominal rate."""
        total = self.nominal_dl_mbps + self.nominal_ul_mbps
        return 1.0 - (self.dl_mbps + self.ul_mbps) / total

    def to_dict(self) -> dict:
        return {
            "scenario": None if self.scenario is None else self.scenario.to_dict(),
            "dl_mbps": self.dl_mbps,
            "ul_mbps": self.ul_mbps,
            "nominal_dl_mbps": self.nominal_dl_mbps,
            "nominal_ul_mbps": self.nominal_ul_mbps,
            "degradation": self.degradation_fraction,
            "gates_tripped": dict(self.gates_tripped),
            "sync_lost": self.sync_lost,
            "sync_quality_db": self.sync_quality_db,
            "pucch_failure_rate": self.pucch_failure_rate,
            "pbch_ok": self.pbch_ok,
            "subframes": [asdict(s) for s in self.subframes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ThroughputReport":
        scenario = d.get("scenario")
        return cls(
            scenario=None if scenario is None else InterferenceScenario.from_dict(scenario),
            dl_mbps=d["dl_mbps"], ul_mbps=d["ul_mbps"],
            nominal_dl_mbps=d["nominal_dl_mbps"], nominal_ul_mbps=d["nominal_ul_mbps"],
            gates_tripped=dict(d["gates_tripped"]), sync_lost=d["sync_lost"],
            sync_quality_db=d["sync_quality_db"], pucch_failure_rate=d["pucch_failure_rate"],
            pbch_ok=d["pbch_ok"],
            subframes=tuple(SubframeOutcome(**s) for s in d["subframes"]),
        )


class CellSearchOutcome(str, enum.Enum):
    ATTACH_LEGIT = "AttachLegit"
    ATTACH_FAKE = "AttachFake"
    NO_ATTACH = "NoAttach"


def _interference_or_zero(grid: ResourceGrid, interference) -> np.ndarray:
    if interference is None:
        return np.zeros(grid.shape)
    interference = np.asarray(interference, dtype=float)
    if interference.shape != grid.shape:
        raise ValueError(f"interference map {interference.shape} does not match grid {grid.shape}")
    return interference


def per_re_sinr(grid: ResourceGrid, interference, config: LinkConfig = LinkConfig()) -> np.ndarray:
    """Linear SINR of every RE: signal / (noise + interference)."""
    interference = _interference_or_zero(grid, interference)
    return grid.power / (config.noise + interference)


def _per_subframe_mean(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    n_sc = values.shape[0]
    v = np.where(mask, values, 0.0).reshape(n_sc, SUBFRAMES_PER_FRAME, SYMBOLS_PER_SUBFRAME)
    m = mask.reshape(n_sc, SUBFRAMES_PER_FRAME, SYMBOLS_PER_SUBFRAME)
    counts = m.sum(axis=(0, 2))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, v.sum(axis=(0, 2)) / np.maximum(counts, 1), np.nan)


def crs_interference_per_rb(grid: ResourceGrid, interference) -> np.ndarray:
    """Mean interference-to-signal ratio over each RB's CRS REs in the frame."""
    interference = _interference_or_zero(grid, interference)
    crs = grid.mask(ChannelKind.CRS)
    ratio = np.where(crs, interference / np.where(crs, grid.power, 1.0), 0.0)
    n_rb = grid.config.bandwidth_rb
    num = ratio.reshape(n_rb, SUBCARRIERS_PER_RB, -1).sum(axis=(1, 2))
    den = crs.reshape(n_rb, SUBCARRIERS_PER_RB, -1).sum(axis=(1, 2))
    return num / den


def effective_data_sinr(grid: ResourceGrid, interference, config: LinkConfig = LinkConfig()) -> np.ndarray:
    """Per-RE SINR with the CRS channel-estimation penalty folded into the noise."""
    interference = _interference_or_zero(grid, interference)
    crs_term = config.crs_penalty_gain * crs_interference_per_rb(grid, interference)
    crs_term = np.repeat(crs_term, SUBCARRIERS_PER_RB)[:, None]
    return grid.power / (config.noise + interference + crs_term)


def control_means(grid: ResourceGrid, sinr: np.ndarray) -> dict[str, np.ndarray]:
    """Per-subframe mean linear SINR over each DL control channel's REs."""
    return {k.name: _per_subframe_mean(sinr, grid.mask(k))
            for k in (ChannelKind.PCFICH, ChannelKind.PDCCH, ChannelKind.PBCH)}


def control_gate(means: dict[str, np.ndarray], config: LinkConfig = LinkConfig()) -> np.ndarray:
    """True for each subframe whose PCFICH and PDCCH both clear their thresholds.

    PBCH is deliberately not part of the gate: it only matters at attach.
    """
    ok = np.ones(SUBFRAMES_PER_FRAME, dtype=bool)
    for kind in ("PCFICH", "PDCCH"):
        ok &= means[kind] >= lin(config.threshold(kind))
    return ok


def sync_tracking(grid: ResourceGrid, interference, config: LinkConfig = LinkConfig()) -> tuple[bool, float]:
    """(sync_lost, sync_quality) with quality the mean linear SINR over PSS/SSS REs."""
    if grid.direction is not Direction.DL:
        raise ValueError("sync tracking needs the DL grid")
    sinr = per_re_sinr(grid, interference, config)
    sync = grid.mask(ChannelKind.PSS) | grid.mask(ChannelKind.SSS)
    quality = float(np.mean(sinr[sync]))
    return bool(db(quality) < config.sync_loss_floor_db), quality


def sync_penalty(quality: float, clean_quality: float, gain: float) -> float:
    """Throughput multiplier in (0, 1] that falls as the PSS/SSS SINR drops.

    Normalised so the noise-only quality gives exactly 1.
    """
    return (1.0 + gain / clean_quality) / (1.0 + gain / quality)


@dataclass(frozen=True)
class DlResult:
    mbps: float
    subframes: tuple
    gates_tripped: dict
    sync_lost: bool
    sync_quality: float
    pbch_ok: bool


@dataclass(frozen=True)
class UlResult:
    mbps: float
    pucch_failure_rate: float
    decodable_fraction: float


def dl_throughput(grid: ResourceGrid, interference, config: LinkConfig = LinkConfig()) -> DlResult:
    interference = _interference_or_zero(grid, interference)
    sinr = per_re_sinr(grid, interference, config)
    means = control_means(grid, sinr)
    ok = control_gate(means, config)
    gates = {k: int(np.sum(means[k] < lin(config.threshold(k)))) for k in ("PCFICH", "PDCCH")}

    data = grid.mask(ChannelKind.PDSCH)
    eff = effective_data_sinr(grid, interference, config)
    good = data & (eff >= lin(config.data_sinr_threshold_db))
    decodable = _per_subframe_mean(good.astype(float), data)

    sync_lost, quality = sync_tracking(grid, interference, config)
    clean_quality = float(np.mean(grid.power[grid.mask(ChannelKind.PSS) | grid.mask(ChannelKind.SSS)])) / config.noise
    penalty = 0.0 if sync_lost else sync_penalty(quality, clean_quality, config.sync_penalty_gain)
    sync_sf = _per_subframe_mean(sinr, grid.mask(ChannelKind.PSS) | grid.mask(ChannelKind.SSS))

    subframes = tuple(
        SubframeOutcome(i, bool(ok[i]), float(decodable[i]),
                        None if np.isnan(sync_sf[i]) else float(db(sync_sf[i])), penalty)
        for i in range(SUBFRAMES_PER_FRAME))
    share = float(np.mean([s.contribution for s in subframes]))
    pbch = means["PBCH"]
    pbch_ok = bool(np.all(pbch[~np.isnan(pbch)] >= lin(config.threshold("PBCH"))))
    return DlResult(config.nominal_dl_mbps * share, subframes, gates, sync_lost,
                    quality, pbch_ok)


def pucch_failure_probability(sinr_db, config: LinkConfig = LinkConfig()):
    """Logistic decode-failure curve: 0.5 at the PUCCH threshold, one decade
    per ``pucch_slope_db`` on either side."""
    x = (np.asarray(sinr_db, dtype=float) - config.threshold("PUCCH")) / config.pucch_slope_db
    return 1.0 / (1.0 + 10.0 ** np.clip(x, -300, 300))


def ul_throughput(grid: ResourceGrid, interference, config: LinkConfig = LinkConfig()) -> UlResult:
    interference = _interference_or_zero(grid, interference)
    sinr = per_re_sinr(grid, interference, config)
    clean = per_re_sinr(grid, None, config)
    pucch = grid.mask(ChannelKind.PUCCH)
    p_fail = pucch_failure_probability(db(_per_subframe_mean(sinr, pucch)), config)
    p_clean = pucch_failure_probability(db(_per_subframe_mean(clean, pucch)), config)
    pusch = grid.mask(ChannelKind.PUSCH)
    good = pusch & (sinr >= lin(config.data_sinr_threshold_db))
    decodable = _per_subframe_mean(good.astype(float), pusch)
    share = np.mean((1.0 - p_fail) / (1.0 - p_clean) * decodable)
    return UlResult(config.nominal_ul_mbps * float(share), float(np.mean(p_fail)),
                    float(np.mean(decodable)))


def estimate_throughput(dl_grid: ResourceGrid | None = None, dl_interference=None,
                        ul_grid: ResourceGrid | None = None, ul_interference=None,
                        config: LinkConfig = LinkConfig(),
                        scenario: InterferenceScenario | None = None) -> ThroughputReport:
    """DL and UL throughput for one frame of interference.

    A direction whose grid is omitted is reported at its nominal rate.
    """
    if dl_grid is not None:
        dl = dl_throughput(dl_grid, dl_interference, config)
        dl_mbps, gates, sync_lost = dl.mbps, dl.gates_tripped, dl.sync_lost
        quality_db, pbch_ok, subframes = float(db(dl.sync_quality)), dl.pbch_ok, dl.subframes
    else:
        dl_mbps, gates, sync_lost = config.nominal_dl_mbps, {}, False
        quality_db, pbch_ok, subframes = float("nan"), True, ()
    if ul_grid is not None:
        ul = ul_throughput(ul_grid, ul_interference, config)
        ul_mbps, pucch_rate = ul.mbps, ul.pucch_failure_rate
    else:
        ul_mbps, pucch_rate = config.nominal_ul_mbps, 0.0
    return ThroughputReport(
        scenario=scenario,
        dl_mbps=min(dl_mbps, config.nominal_dl_mbps),
        ul_mbps=min(ul_mbps, config.nominal_ul_mbps),
        nominal_dl_mbps=config.nominal_dl_mbps,
        nominal_ul_mbps=config.nominal_ul_mbps,
        gates_tripped=gates,
        sync_lost=sync_lost,
        sync_quality_db=quality_db,
        pucch_failure_rate=pucch_rate,
        pbch_ok=pbch_ok,
        subframes=subframes,
    )


def cell_search_outcome(legit_grid: ResourceGrid, spoof: InterferenceScenario | None,
                        config: LinkConfig = LinkConfig(),
                        spoof_has_sib1: bool = False) -> CellSearchOutcome:
    """What an idle UE camps on when a spoofer broadcasts its own PSS/SSS.

    The spoofer captures the UE when its PSS arrives at least
    ``capture_threshold_db`` stronger than the legitimate one. A fake cell
    without a valid SIB1 leaves the UE unattached.
    """
    if spoof is None:
        return CellSearchOutcome.ATTACH_LEGIT
    if spoof.kind is not ScenarioKind.PSS_SSS_SPOOF:
        raise ValueError(f"cell search outcome needs a spoofing scenario, got {spoof.kind.name}")
    legit_pss = float(np.mean(legit_grid.power[legit_grid.mask(ChannelKind.PSS)]))
    margin_db = spoof.isr_re_db - float(db(legit_pss))
    if margin_db < config.capture_threshold_db:
        return CellSearchOutcome.ATTACH_LEGIT
    return CellSearchOutcome.ATTACH_FAKE if spoof_has_sib1 else CellSearchOutcome.NO_ATTACH
