"""Power-amplifier efficiency, energy per delivered symbol, and composite ranking."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from constkit.errors import UndefinedEnergy


@dataclass(frozen=True)
class PaModel:
    """Back-off efficiency model; defaults are illustrative, not measured."""

    eta_max: float = 0.6
    obo_slope: float = 1.0
    p_static: float = 0.5
    p_avg: float = 1.0
    symbol_rate: float = 1e6

    def __post_init__(self) -> None:
        if not 0 < self.eta_max <= 1:
            raise ValueError("eta_max must lie in (0, 1]")
        if min(self.obo_slope, self.p_avg, self.symbol_rate) <= 0 or self.p_static < 0:
            raise ValueError("PA parameters must be positive (p_static may be zero)")


@dataclass(frozen=True)
class ScoreWeights:
    w_dmin: float = 0.35
    w_power: float = 0.25
    w_ser: float = 0.40
    d_ref: float | None = None

    def __post_init__(self) -> None:
        ws = (self.w_dmin, self.w_power, self.w_ser)
        if any(w < 0 for w in ws):
            raise ValueError("weights must be nonnegative")
        if abs(math.fsum(ws) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {math.fsum(ws)!r}")
        if self.d_ref is not None and self.d_ref <= 0:
            raise ValueError("d_ref must be positive")

    @classmethod
    def renormalized(cls, w_dmin: float, w_power: float, w_ser: float,
                     d_ref: float | None = None) -> "ScoreWeights":
        total = w_dmin + w_power + w_ser
        return cls(w_dmin / total, w_power / total, 1.0 - (w_dmin + w_power) / total, d_ref)


@dataclass(frozen=True)
class EnergyReport:
    papr_db: float
    eta: float
    p_cons: float
    e_succ: float
    power_eff_score: float
    composite: float | None = None


def pa_efficiency(papr_db: float, pa: PaModel = PaModel()) -> float:
    if papr_db < 0:
        raise ValueError("papr_db must be nonnegative")
    return pa.eta_max * 10.0 ** (-pa.obo_slope * papr_db / 10.0)


def consumed_power(pa: PaModel, papr_db: float) -> float:
    return pa.p_avg / pa_efficiency(papr_db, pa) + pa.p_static


def energy_per_success(p_cons: float, symbol_rate: float, ser: float) -> float:
    if ser >= 1.0:
        raise UndefinedEnergy("no symbols are delivered at SER = 1")
    if ser < 0:
        raise ValueError("ser must be nonnegative")
    return p_cons / (symbol_rate * (1.0 - ser))


def power_efficiency_score(papr_db: float) -> float:
    """Relative PA efficiency under unit back-off slope, in [0, 1]."""
    if papr_db < 0:
        raise ValueError("papr_db must be nonnegative")
    return 10.0 ** (-papr_db / 10.0)


def composite_score(d_min: float, papr_db: float, ser_10db: float,
                    w: ScoreWeights = ScoreWeights()) -> float:
    d_ref = w.d_ref if w.d_ref is not None else d_min
    ratio = min(d_min / d_ref, 1.0)
    return (w.w_dmin * ratio + w.w_power * power_efficiency_score(papr_db)
            + w.w_ser * (1.0 - ser_10db))


def energy_report(papr_db: float, ser: float, pa: PaModel = PaModel(),
                  d_min: float | None = None, w: ScoreWeights | None = None) -> EnergyReport:
    p_cons = consumed_power(pa, papr_db)
    comp = None
    if d_min is not None:
        comp = composite_score(d_min, papr_db, ser, w or ScoreWeights())
    return EnergyReport(papr_db, pa_efficiency(papr_db, pa), p_cons,
                        energy_per_success(p_cons, pa.symbol_rate, ser),
                        power_efficiency_score(papr_db), comp)


@dataclass(frozen=True)
class RankedDesign:
    rank: int
    label: str
    d_min: float
    papr_db: float
    ser_10db: float
    power_eff: float
    composite: float


def rank_designs(entries: Sequence[tuple[str, float, float, float]],
                 w: ScoreWeights = ScoreWeights()) -> list[RankedDesign]:
    """Order designs by composite score, best first; ties by label.

    Without an explicit ``d_ref`` the largest d_min among the entries is used.
    """
    if not entries:
        return []
    d_ref = w.d_ref if w.d_ref is not None else max(e[1] for e in entries)
    w = ScoreWeights(w.w_dmin, w.w_power, w.w_ser, d_ref)
    scored = [(composite_score(d, p, s, w), label, d, p, s) for label, d, p, s in entries]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return [RankedDesign(i + 1, label, d, p, s, power_efficiency_score(p), score)
            for i, (score, label, d, p, s) in enumerate(scored)]


RANKING_COLUMNS = ["rank", "label", "d_min", "papr_db", "ser_10db", "power_eff", "composite"]


def write_ranking_csv(report: Sequence[RankedDesign], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RANKING_COLUMNS)
        for r in report:
            w.writerow([r.rank, r.label] + [f"{x:.9g}" for x in
                                            (r.d_min, r.papr_db, r.ser_10db, r.power_eff, r.composite)])
