"""Monte Carlo symbol-error simulation over AWGN and flat Rayleigh channels."""

from __future__ import annotations

import csv
import enum
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from constkit.constellation import Constellation
from constkit.errors import SchemaError, SingularChannel, UndefinedPenalty
from constkit.metrics import SnrSpec, as_snr
from constkit.rng import RngStream, derive_stream

log = logging.getLogger(__name__)

Z95 = 1.96
DEFAULT_CHUNK = 10_000


class ChannelKind(str, enum.Enum):
    AWGN = "AWGN"
    Rayleigh = "Rayleigh"

    @classmethod
    def parse(cls, value: "ChannelKind | str") -> "ChannelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key == "awgn":
            return cls.AWGN
        if key in ("rayleigh", "rayleighflat"):
            return cls.Rayleigh
        raise ValueError(f"unknown channel {value!r}")


@dataclass(frozen=True)
class ChannelModel:
    """Flat channel with perfect receiver CSI."""

    kind: ChannelKind = ChannelKind.AWGN

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ChannelKind.parse(self.kind))


AWGN = ChannelModel(ChannelKind.AWGN)
RAYLEIGH = ChannelModel(ChannelKind.Rayleigh)


def as_channel(model: ChannelModel | str) -> ChannelModel:
    return model if isinstance(model, ChannelModel) else ChannelModel(model)


@dataclass(frozen=True)
class SerPoint:
    snr_db: float
    symbols_sent: int
    symbol_errors: int
    ser: float
    ci_low: float
    ci_high: float
    seed: int
    chunk_size: int = DEFAULT_CHUNK

    @property
    def half_width(self) -> float:
        return Z95 * math.sqrt(self.ser * (1.0 - self.ser) / self.symbols_sent)


def sample_symbols(c: Constellation, n: int, s: RngStream) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be >= 1")
    return s.choice(c.probs, n)


def apply_channel(indices: np.ndarray, c: Constellation, model: ChannelModel | str,
                  snr: SnrSpec | float, s: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Return received samples ``y`` and channel gains ``h``.

    Noise (2n normals) is drawn before the Rayleigh gains (2n normals).
    """
    model = as_channel(model)
    snr = as_snr(snr)
    n = len(indices)
    x = c.points[indices]
    noise = math.sqrt(snr.n0) * s.complex_normal(n)
    if model.kind is ChannelKind.AWGN:
        h = np.ones(n, dtype=np.complex128)
        return x + noise, h
    h = s.complex_normal(n)
    return h * x + noise, h


def ml_detect_batch(y: np.ndarray, h: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Vectorized argmin |y - h s|^2; ties go to the smallest index."""
    d = np.abs(y[:, None] - h[:, None] * points[None, :])
    return np.argmin(d, axis=1)


def ml_detect(y: complex, h: complex, c: Constellation) -> int:
    if abs(h) == 0:
        raise SingularChannel("channel gain is zero")
    d = np.abs(y - h * c.points) ** 2
    return int(np.argmin(d))


def confidence_interval(p_hat: float, n: int) -> tuple[float, float]:
    """95% Wald interval clamped to [0, 1]."""
    if not 0.0 <= p_hat <= 1.0 or n < 1:
        raise ValueError("need 0 <= p_hat <= 1 and n >= 1")
    hw = Z95 * math.sqrt(p_hat * (1.0 - p_hat) / n)
    return max(0.0, p_hat - hw), min(1.0, p_hat + hw)


def _chunk_errors(c: Constellation, model: ChannelModel, snr: SnrSpec, seed: int,
                  key: tuple, n: int) -> int:
    s = derive_stream(seed, key)
    idx = sample_symbols(c, n, s)
    y, h = apply_channel(idx, c, model, snr, s)
    return int(np.count_nonzero(ml_detect_batch(y, h, c.points) != idx))


def estimate_ser(c: Constellation, model: ChannelModel | str, snr: SnrSpec | float, n: int,
                 master_seed: int, chunk_size: int = DEFAULT_CHUNK, workers: int = 1) -> SerPoint:
    """Empirical SER from ``n`` symbols, split into independently keyed chunks.

    The result depends only on ``(c.label, channel, snr, n, master_seed,
    chunk_size)``; the worker count affects wall time only.
    """
    if n < 1000:
        raise ValueError("n must be at least 1000")
    if chunk_size < 1:
        raise ValueError("chunk_size must be positive")
    model = as_channel(model)
    snr = as_snr(snr)
    sizes = [min(chunk_size, n - start) for start in range(0, n, chunk_size)]
    keys = [(c.label, model.kind.value, repr(float(snr.snr_db)), i) for i in range(len(sizes))]

    def run(i: int) -> int:
        return _chunk_errors(c, model, snr, master_seed, keys[i], sizes[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = sum(pool.map(run, range(len(sizes))))
    else:
        errors = sum(run(i) for i in range(len(sizes)))
    ser = errors / n
    lo, hi = confidence_interval(ser, n)
    return SerPoint(float(snr.snr_db), n, errors, ser, lo, hi, int(master_seed), int(chunk_size))


def rayleigh_penalty(ser_awgn: float, ser_rayleigh: float) -> float:
    """Relative SER increase from AWGN to Rayleigh, in percent."""
    if ser_awgn == 0:
        raise UndefinedPenalty("AWGN SER is zero")
    return 100.0 * (ser_rayleigh - ser_awgn) / ser_awgn


# -- sweeps -----------------------------------------------------------------

def snr_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid ``start, start+step, ..., stop``."""
    if step <= 0:
        raise ValueError("SNR step must be positive")
    if stop < start:
        raise ValueError("SNR stop must not be below start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.array([round(start + k * step, 10) for k in range(count)])


@dataclass
class SweepConfig:
    schemes: Sequence = ()
    channels: Sequence[str] = ("AWGN", "Rayleigh")
    snr_start: float = -5.0
    snr_stop: float = 50.0
    snr_step: float = 1.0
    symbols: int = 1_000_000
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK
    workers: int = 1

    def __post_init__(self) -> None:
        if self.symbols < 1000:
            raise ValueError("symbols per point must be at least 1000")
        if self.snr_step <= 0:
            raise ValueError("SNR step must be positive")

    @property
    def snrs(self) -> np.ndarray:
        return snr_grid(self.snr_start, self.snr_stop, self.snr_step)


@dataclass
class SweepRow:
    scheme: str
    channel: str
    point: SerPoint | None
    status: str = "ok"


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)

    def points(self, scheme: str, channel: str) -> list[SerPoint]:
        ch = ChannelKind.parse(channel).value
        return [r.point for r in self.rows if r.scheme == scheme and r.channel == ch and r.point]

    @property
    def failures(self) -> list[SweepRow]:
        return [r for r in self.rows if r.status != "ok"]


def _resolve(item) -> Constellation:
    if isinstance(item, Constellation):
        return item
    from constkit.designs import resolve

    return resolve(item)


def _item_label(item) -> str:
    if isinstance(item, Constellation):
        return item.label
    return getattr(item, "label", None) or str(item)


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Evaluate every (scheme, channel, SNR) cell of the configured grid.

    A scheme that fails to build yields one ``status != "ok"`` row per channel
    and the sweep carries on with the rest.
    """
    result = SweepResult(cfg)
    channels = [ChannelKind.parse(ch) for ch in cfg.channels]
    for item in cfg.schemes:
        try:
            c = _resolve(item)
        except Exception as exc:  # reported per scheme, never fatal to the sweep
            log.warning("scheme %s failed: %s", _item_label(item), exc)
            for ch in channels:
                result.rows.append(SweepRow(_item_label(item), ch.value, None,
                                            f"error: {type(exc).__name__}: {exc}"))
            continue
        for ch in channels:
            for snr in cfg.snrs:
                pt = estimate_ser(c, ChannelModel(ch), float(snr), cfg.symbols, cfg.seed,
                                  cfg.chunk_size, cfg.workers)
                result.rows.append(SweepRow(c.label, ch.value, pt))
    return result


SWEEP_COLUMNS = ["scheme", "channel", "snr_db", "symbols", "errors", "ser",
                 "ci_low", "ci_high", "seed", "chunk_size", "status"]


def _g(x: float) -> str:
    return f"{x:.9g}"


def write_sweep_csv(result: SweepResult | Iterable[SweepRow], path: str | Path) -> None:
    rows = result.rows if isinstance(result, SweepResult) else list(result)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            p = r.point
            if p is None:
                w.writerow([r.scheme, r.channel] + [""] * 8 + [r.status])
                continue
            w.writerow([r.scheme, r.channel, _g(p.snr_db), p.symbols_sent, p.symbol_errors,
                        _g(p.ser), _g(p.ci_low), _g(p.ci_high), p.seed, p.chunk_size, r.status])


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    """Parse a sweep CSV; the trailing ``status`` column is optional."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [k for k in SWEEP_COLUMNS[:-1] if k not in cols]
        if missing:
            raise SchemaError(f"{path}: missing sweep columns {missing}")
        rows = []
        try:
            for rec in reader:
                status = rec.get("status") or "ok"
                if status != "ok" or rec["ser"] == "":
                    rows.append(SweepRow(rec["scheme"], rec["channel"], None, status))
                    continue
                pt = SerPoint(float(rec["snr_db"]), int(rec["symbols"]), int(rec["errors"]),
                              float(rec["ser"]), float(rec["ci_low"]), float(rec["ci_high"]),
                              int(rec["seed"]), int(rec["chunk_size"]))
                rows.append(SweepRow(rec["scheme"], rec["channel"], pt, status))
        except (ValueError, KeyError) as exc:
            raise SchemaError(f"{path}: {exc}") from exc
    return rows
