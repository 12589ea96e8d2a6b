"""Monte-Carlo experiment engine: block-fading frame loop, detector
execution, error counting, stopping rules, deterministic parallel sweeps,
and CSV/JSON persistence.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, replace

import numpy as np

from .channel import ChannelModel, PointingModel, TurbulenceModel, gain_moment, sample_gain
from .glrt import TrellisDetector, pcsi_detect
from .modem import PamScheme, symbol_bit_errors, transmit

__all__ = [
    "StopRule",
    "SimConfig",
    "DetectorStats",
    "BerRecord",
    "run_point",
    "run_sweep",
    "write_results",
    "read_results",
    "load_config",
    "config_from_dict",
    "apply_overrides",
    "PRESET_CHANNELS",
]

SCHEMA_VERSION = 1

CSV_COLUMNS = [
    "snr_db",
    "eff_snr_db",
    "detector",
    "bits",
    "bit_errors",
    "ber",
    "ci95",
    "symbols",
    "symbol_errors",
    "sep",
    "mean_merge_len",
    "forced_decisions",
    "neg_hhat",
    "seed",
    "wall_time_s",
]

PRESET_CHANNELS = {
    "weak": ChannelModel.weak,
    "strong": ChannelModel.strong,
    "unity": ChannelModel.unity,
}


@dataclass(frozen=True)
class StopRule:
    min_bit_errors: int = 200
    max_bits: int = 100_000_000


@dataclass(frozen=True)
class SimConfig:
    """Full experiment description for one sweep."""

    m_order: int
    channel: ChannelModel
    window_len: int = 100
    l_max: int = 20
    n_pilots: int = 4
    n_data: int = 4000
    coherence_len: int = 10_000
    snr_grid_db: tuple = (10.0,)
    seed: int = 0
    stop: StopRule = field(default_factory=StopRule)
    detectors: tuple = ("glrt", "pcsi")
    eb: float = 1.0
    zero_run: int = 0  # forced run of zero symbols at frame start (robustness tests)

    def __post_init__(self):
        if self.n_pilots + self.n_data > self.coherence_len:
            raise ValueError("P + D must not exceed the coherence length L_c")
        if self.window_len > self.coherence_len / 10:
            raise ValueError("L_w must satisfy L_w <= L_c / 10")
        if self.n_pilots < 1:
            raise ValueError("at least one pilot per frame is required")
        for det in self.detectors:
            if det not in ("glrt", "pcsi"):
                raise ValueError(f"unknown detector {det!r}")
        if self.zero_run > self.n_data:
            raise ValueError("zero_run cannot exceed D")

    def noise_psd(self, snr_db: float) -> float:
        """N0 from the average SNR per bit: SNR_ave = E[h^2] Eb / N0."""
        eh2 = gain_moment(self.channel, 2)
        return eh2 * self.eb / 10.0 ** (snr_db / 10.0)


@dataclass
class DetectorStats:
    bit_errors: int = 0
    bits: int = 0
    symbol_errors: int = 0
    symbols: int = 0
    mean_merge_len: float = 0.0
    forced_decisions: int = 0
    neg_hhat_events: int = 0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else math.nan

    @property
    def sep(self) -> float:
        return self.symbol_errors / self.symbols if self.symbols else math.nan

    @property
    def ci95(self) -> float:
        if not self.bits:
            return math.nan
        p = self.ber
        return 1.96 * math.sqrt(p * (1.0 - p) / self.bits)


@dataclass
class BerRecord:
    snr_db: float
    eff_snr_db: float
    detectors: dict  # name -> DetectorStats
    seed: int
    wall_time_s: float
    low_confidence: bool = False


def _point_rng(master_seed: int, point_index: int) -> np.random.Generator:
    # Stream derived from (master seed, point index): results do not depend
    # on worker count or scheduling order.
    return np.random.default_rng(np.random.SeedSequence((master_seed, point_index)))


def run_point(config: SimConfig, snr_db: float, point_index: int = 0) -> BerRecord:
    """Simulate one SNR point until the stop rule is satisfied."""
    t0 = time.perf_counter()
    rng = _point_rng(config.seed, point_index)
    n0 = config.noise_psd(snr_db)
    scheme = PamScheme(config.m_order, config.eb, n0)
    bits_per_sym = scheme.bits_per_symbol
    m_order = config.m_order
    stats = {det: DetectorStats() for det in config.detectors}
    merge_len_sum = 0.0
    frames = 0
    pilot_syms = np.full(config.n_pilots, m_order - 1, dtype=int)

    def done() -> bool:
        bits = config.n_data * bits_per_sym * frames
        if bits >= config.stop.max_bits:
            return True
        return bits > 0 and all(
            s.bit_errors >= config.stop.min_bit_errors for s in stats.values()
        )

    while not done():
        h = float(sample_gain(config.channel, rng))
        data = rng.integers(0, m_order, config.n_data)
        if config.zero_run:
            data[: config.zero_run] = 0
        symbols = np.concatenate([pilot_syms, data])
        r = transmit(symbols, h, scheme, rng)
        r_pilots, r_data = r[: config.n_pilots], r[config.n_pilots :]

        if "glrt" in stats:
            det = TrellisDetector(scheme, config.window_len, config.l_max)
            det.load_pilots(pilot_syms, r_pilots)
            decided: list = []
            step = det.step
            for r_k in r_data:
                decided += step(float(r_k))
            decided += det.finalize()
            decided_arr = np.asarray(decided, dtype=int)
            s = stats["glrt"]
            s.symbol_errors += int(np.count_nonzero(decided_arr != data))
            s.symbols += config.n_data
            s.bit_errors += symbol_bit_errors(data, decided_arr, m_order)
            s.bits += config.n_data * bits_per_sym
            s.forced_decisions += det.forced_decisions
            s.neg_hhat_events += det.neg_hhat_events
            merge_len_sum += det.mean_ongoing_len

        if "pcsi" in stats:
            detected = pcsi_detect(r_data, h, scheme.d, m_order)
            s = stats["pcsi"]
            s.symbol_errors += int(np.count_nonzero(detected != data))
            s.symbols += config.n_data
            s.bit_errors += symbol_bit_errors(data, detected, m_order)
            s.bits += config.n_data * bits_per_sym
        frames += 1

    if "glrt" in stats and frames:
        stats["glrt"].mean_merge_len = merge_len_sum / frames

    low_conf = any(
        s.bit_errors < config.stop.min_bit_errors for s in stats.values()
    )
    eff_snr_db = snr_db + 10.0 * math.log10(
        (config.n_pilots + config.n_data) / config.n_data
    )
    return BerRecord(
        snr_db=snr_db,
        eff_snr_db=eff_snr_db,
        detectors=stats,
        seed=config.seed,
        wall_time_s=time.perf_counter() - t0,
        low_confidence=low_conf,
    )


def _run_point_task(args):
    config, snr_db, idx = args
    return idx, run_point(config, snr_db, idx)


def run_sweep(config: SimConfig, n_workers: int = 1) -> list:
    """Run every SNR point in the grid; records sorted by snr_db ascending.

    Per-point rng streams derive from (seed, point index), so any worker
    count yields identical results.
    """
    order = sorted(range(len(config.snr_grid_db)), key=lambda i: config.snr_grid_db[i])
    tasks = [(config, config.snr_grid_db[i], i) for i in order]
    if n_workers <= 1:
        results = [_run_point_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_run_point_task, tasks))
    by_index = {idx: rec for idx, rec in results}
    return [by_index[i] for i in order]


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _record_rows(rec: BerRecord):
    for det, s in rec.detectors.items():
        yield {
            "snr_db": rec.snr_db,
            "eff_snr_db": rec.eff_snr_db,
            "detector": det,
            "bits": s.bits,
            "bit_errors": s.bit_errors,
            "ber": s.ber,
            "ci95": s.ci95,
            "symbols": s.symbols,
            "symbol_errors": s.symbol_errors,
            "sep": s.sep,
            "mean_merge_len": s.mean_merge_len,
            "forced_decisions": s.forced_decisions,
            "neg_hhat": s.neg_hhat_events,
            "seed": rec.seed,
            "wall_time_s": rec.wall_time_s,
        }


def write_results(records, path, fmt: str = "csv") -> None:
    """Persist sweep records; CSV columns are fixed, JSON carries a schema tag."""
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
                writer.writeheader()
                for rec in records:
                    for row in _record_rows(rec):
                        writer.writerow(row)
        elif fmt == "json":
            doc = {
                "schema_version": SCHEMA_VERSION,
                "records": [
                    {
                        "snr_db": rec.snr_db,
                        "eff_snr_db": rec.eff_snr_db,
                        "seed": rec.seed,
                        "wall_time_s": rec.wall_time_s,
                        "low_confidence": rec.low_confidence,
                        "detectors": {
                            det: vars(s) for det, s in rec.detectors.items()
                        },
                    }
                    for rec in records
                ],
            }
            with open(path, "w") as fh:
                json.dump(doc, fh, indent=2)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise OSError(f"failed writing results to {path}: {exc}") from exc


def read_results(path):
    """Parse a results CSV back into row dicts (numbers converted)."""
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            parsed = {}
            for key, val in row.items():
                if key == "detector":
                    parsed[key] = val
                elif key in ("bits", "bit_errors", "symbols", "symbol_errors",
                             "forced_decisions", "neg_hhat", "seed"):
                    parsed[key] = int(val)
                else:
                    parsed[key] = float(val)
            rows.append(parsed)
    return rows


# ---------------------------------------------------------------------------
# Config files
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "M", "Eb", "L_w", "l_max", "P", "D", "L_c", "snr_grid_db", "seed",
    "detectors", "zero_run",
}
_CHANNEL_KEYS = {"preset", "turbulence", "sigma_x", "alpha", "beta"}
_POINTING_KEYS = {"enabled", "A0", "gamma_sq"}
_STOP_KEYS = {"min_bit_errors", "max_bits"}


def _reject_unknown(given: dict, allowed: set, section: str) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ValueError(f"unknown key(s) in {section}: {sorted(unknown)}")


def _channel_from_dict(doc: dict) -> ChannelModel:
    ch = dict(doc.get("channel", {}))
    pt = dict(doc.get("pointing", {}))
    _reject_unknown(ch, _CHANNEL_KEYS, "channel")
    _reject_unknown(pt, _POINTING_KEYS, "pointing")
    if "preset" in ch:
        if len(ch) > 1 or pt:
            raise ValueError("channel.preset cannot be combined with other channel keys")
        try:
            return PRESET_CHANNELS[ch["preset"]]()
        except KeyError:
            raise ValueError(f"unknown channel preset {ch['preset']!r}") from None
    kind = ch.get("turbulence", "unity")
    if kind == "lognormal":
        turb = TurbulenceModel.lognormal(float(ch["sigma_x"]))
    elif kind == "gamma_gamma":
        turb = TurbulenceModel.gamma_gamma(float(ch["alpha"]), float(ch["beta"]))
    elif kind == "unity":
        turb = TurbulenceModel.unity()
    else:
        raise ValueError(f"unknown turbulence {kind!r}")
    if pt.get("enabled", False):
        point = PointingModel(a0=float(pt["A0"]), gamma_sq=float(pt["gamma_sq"]), enabled=True)
    else:
        point = PointingModel.off()
    return ChannelModel(turb, point)


def config_from_dict(doc: dict) -> SimConfig:
    """Build a SimConfig from a parsed config document, rejecting unknown keys."""
    doc = dict(doc)
    stop_doc = dict(doc.pop("stop", {}))
    _reject_unknown(stop_doc, _STOP_KEYS, "stop")
    channel = _channel_from_dict(doc)
    doc.pop("channel", None)
    doc.pop("pointing", None)
    _reject_unknown(doc, _TOP_KEYS, "top level")
    if "M" not in doc:
        raise ValueError("config must set M")
    stop = StopRule(
        min_bit_errors=int(stop_doc.get("min_bit_errors", StopRule.min_bit_errors)),
        max_bits=int(stop_doc.get("max_bits", StopRule.max_bits)),
    )
    detectors = doc.get("detectors", ["glrt", "pcsi"])
    return SimConfig(
        m_order=int(doc["M"]),
        channel=channel,
        window_len=int(doc.get("L_w", 100)),
        l_max=int(doc.get("l_max", 20)),
        n_pilots=int(doc.get("P", 4)),
        n_data=int(doc.get("D", 4000)),
        coherence_len=int(doc.get("L_c", 10_000)),
        snr_grid_db=tuple(float(x) for x in doc.get("snr_grid_db", [10.0])),
        seed=int(doc.get("seed", 0)),
        stop=stop,
        detectors=tuple(detectors),
        eb=float(doc.get("Eb", 1.0)),
        zero_run=int(doc.get("zero_run", 0)),
    )


def load_config(path) -> SimConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValueError(f"config parse error in {path}: {exc}") from None
    return config_from_dict(doc)


def apply_overrides(config: SimConfig, overrides) -> SimConfig:
    """Apply repeatable key=value overrides (keys as in the config file)."""
    updates = {}
    stop = config.stop
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override must be key=value: {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key == "M":
            updates["m_order"] = int(raw)
        elif key == "Eb":
            updates["eb"] = float(raw)
        elif key == "L_w":
            updates["window_len"] = int(raw)
        elif key == "l_max":
            updates["l_max"] = int(raw)
        elif key == "P":
            updates["n_pilots"] = int(raw)
        elif key == "D":
            updates["n_data"] = int(raw)
        elif key == "L_c":
            updates["coherence_len"] = int(raw)
        elif key == "seed":
            updates["seed"] = int(raw)
        elif key == "zero_run":
            updates["zero_run"] = int(raw)
        elif key == "snr_grid_db":
            updates["snr_grid_db"] = tuple(float(x) for x in raw.split(","))
        elif key == "detectors":
            updates["detectors"] = tuple(raw.split(","))
        elif key == "stop.min_bit_errors":
            stop = replace(stop, min_bit_errors=int(raw))
        elif key == "stop.max_bits":
            stop = replace(stop, max_bits=int(raw))
        elif key == "channel.preset":
            updates["channel"] = PRESET_CHANNELS[raw]()
        else:
            raise ValueError(f"unknown override key {key!r}")
    return replace(config, stop=stop, **updates)
