"""Scheme catalog and the named 16-point design set used for comparisons."""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any

from constkit.constellation import Constellation, Scheme, SchemeSpec, generate
from constkit.errors import UnsupportedScheme

CATALOG: dict[Scheme, dict[str, Any]] = {
    Scheme.BPSK: {"orders": "2", "params": {}},
    Scheme.QPSK: {"orders": "4", "params": {}},
    Scheme.MPSK: {"orders": ">=2", "params": {}},
    Scheme.SquareQAM: {"orders": "L^2, L even", "params": {}},
    Scheme.HexLattice: {"orders": ">=2", "params": {}},
    Scheme.APSK: {"orders": "sum(rings)", "params": {"rings": "list[int]", "radii": "list[float]",
                                                     "phases": "list[float], optional"}},
    Scheme.CrossShaped: {"orders": "L^2, L even, >=16", "params": {}},
    Scheme.Elliptical: {"orders": "L^2, L even", "params": {"alpha": 1.0, "beta": 0.5}},
    Scheme.CircularAsymmetric: {"orders": "multiple of 4", "params": {"outer_ratio": 2.0}},
    Scheme.StarShaped: {"orders": "even", "params": {"inner_ratio": 0.5}},
    Scheme.Triangular: {"orders": ">=3", "params": {}},
    Scheme.HexRing: {"orders": ">=8", "params": {"inner_radius": 1.0, "outer_radius": 2.0}},
    Scheme.ProbShapedQAM: {"orders": "L^2, L even", "params": {"lam": 0.1}},
    Scheme.DiscGAM: {"orders": ">=2", "params": {}},
    Scheme.BellGAM: {"orders": ">=2", "params": {"lam": "unit-variance default"}},
    Scheme.FromFile: {"orders": "rows in file", "params": {"path": "CSV index,re,im[,prob]"}},
}

DEFAULT_ORDER = {Scheme.BPSK: 2, Scheme.QPSK: 4}

OPTIMIZER_SEED = 1

# display name -> scheme recipe; the two optimizer rows are produced on demand
DESIGNS: dict[str, Scheme | str] = {
    "Lattice-Based": Scheme.HexLattice,
    "16-QAM": Scheme.SquareQAM,
    "PSO-Optimized": "pso",
    "GA-Optimized": "ga",
    "Star-Shaped": Scheme.StarShaped,
    "Disc-GAM": Scheme.DiscGAM,
    "Probabilistic-Shaped": Scheme.ProbShapedQAM,
    "Bell-GAM": Scheme.BellGAM,
    "Hexagonal": Scheme.HexRing,
    "Circular-Asymmetric": Scheme.CircularAsymmetric,
    "Triangular": Scheme.Triangular,
    "Cross-Shaped": Scheme.CrossShaped,
    "16-PSK": Scheme.MPSK,
    "Elliptical": Scheme.Elliptical,
}


def catalog() -> list[dict[str, Any]]:
    return [{"id": s.value, "orders": v["orders"], "params": v["params"]}
            for s, v in CATALOG.items()]


@lru_cache(maxsize=None)
def _optimized(method: str, M: int, seed: int) -> Constellation:
    from constkit.optimize import GaConfig, PsoConfig, ga_optimize, pso_optimize

    if method == "pso":
        return pso_optimize(M, PsoConfig(seed=seed)).constellation
    return ga_optimize(M, GaConfig(seed=seed)).constellation


def design(name: str) -> Constellation:
    """One of the named 16-point designs, labeled with its display name."""
    try:
        recipe = DESIGNS[name]
    except KeyError:
        raise UnsupportedScheme(f"unknown design {name!r}") from None
    if isinstance(recipe, Scheme):
        return generate(SchemeSpec(recipe, 16, label=name))
    return _optimized(recipe, 16, OPTIMIZER_SEED).with_label(name)


def parse_spec(text: str, params: dict[str, Any] | None = None) -> SchemeSpec:
    """Parse ``Scheme`` or ``Scheme:M`` into a spec."""
    name, _, order = text.partition(":")
    try:
        scheme = Scheme(name)
    except ValueError:
        raise UnsupportedScheme(f"unknown scheme {name!r}") from None
    M = int(order) if order else DEFAULT_ORDER.get(scheme, 16)
    return SchemeSpec(scheme, M, dict(params or {}))


def resolve(item: Any) -> Constellation:
    """Turn a design name, scheme string, spec, or CSV path into a constellation."""
    if isinstance(item, Constellation):
        return item
    if isinstance(item, SchemeSpec):
        return generate(item)
    text = str(item)
    if text in DESIGNS:
        return design(text)
    if text.lower().endswith(".csv"):
        from constkit.constellation import normalize_energy, read_constellation_csv

        return normalize_energy(read_constellation_csv(text, label=Path(text).stem))
    return generate(parse_spec(text))
