"""Constellation data model and deterministic generators.

Points are held as a ``complex128`` numpy array; a single point is a plain
Python ``complex``. Every generator returns a constellation normalized to unit
probability-weighted average energy.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from constkit.errors import (
    DegenerateConstellation,
    InvalidDistribution,
    SchemaError,
    UnsupportedScheme,
)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
GOLDEN_ANGLE = 2.0 * math.pi * (1.0 - 1.0 / GOLDEN_RATIO)

DUPLICATE_TOL = 1e-9
PROB_SUM_TOL = 1e-12


class Scheme(str, enum.Enum):
    BPSK = "BPSK"
    QPSK = "QPSK"
    MPSK = "MPSK"
    SquareQAM = "SquareQAM"
    HexLattice = "HexLattice"
    APSK = "APSK"
    CrossShaped = "CrossShaped"
    Elliptical = "Elliptical"
    CircularAsymmetric = "CircularAsymmetric"
    StarShaped = "StarShaped"
    Triangular = "Triangular"
    HexRing = "HexRing"
    ProbShapedQAM = "ProbShapedQAM"
    DiscGAM = "DiscGAM"
    BellGAM = "BellGAM"
    FromFile = "FromFile"


@dataclass(frozen=True, eq=False)
class Constellation:
    """A labeled set of complex points with per-symbol probabilities."""

    label: str
    points: np.ndarray
    probs: np.ndarray

    @property
    def M(self) -> int:
        return int(self.points.size)

    @property
    def energy(self) -> float:
        """Probability-weighted average symbol energy."""
        return float(np.dot(self.probs, np.abs(self.points) ** 2))

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.probs == self.probs[0]))

    def with_label(self, label: str) -> "Constellation":
        return Constellation(label, self.points, self.probs)

    def __len__(self) -> int:
        return self.M

    def __repr__(self) -> str:
        return f"Constellation(label={self.label!r}, M={self.M}, energy={self.energy:.6g})"


@dataclass(frozen=True)
class SchemeSpec:
    """Parametric recipe that deterministically produces a constellation.

    ``params`` keys by scheme:

    - ``APSK``: ``rings`` (points per ring), ``radii``, optional ``phases``
    - ``ProbShapedQAM``: ``lam`` (Maxwell-Boltzmann rate on the integer grid)
    - ``BellGAM``: ``lam`` (defaults to unit pre-normalization variance)
    - ``Elliptical``: ``alpha``, ``beta``
    - ``StarShaped``: ``inner_ratio``
    - ``CircularAsymmetric``: ``outer_ratio``
    - ``HexRing``: ``inner_radius``, ``outer_radius``
    - ``FromFile``: ``path``
    """

    scheme: Scheme
    order: int
    params: Mapping[str, Any] = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def make_constellation(
    points: Iterable[complex],
    probs: Sequence[float] | np.ndarray | None = None,
    label: str = "",
) -> Constellation:
    """Build a validated, *un-normalized* constellation.

    Probabilities default to uniform. Raises ``DegenerateConstellation`` for
    coincident points and ``InvalidDistribution`` for a bad probability vector.
    """
    pts = np.array(list(points) if not isinstance(points, np.ndarray) else points,
                   dtype=np.complex128).ravel()
    if pts.size < 2:
        raise DegenerateConstellation("a constellation needs at least 2 points")
    if not np.all(np.isfinite(pts)):
        raise DegenerateConstellation("non-finite point coordinates")
    diff = np.abs(pts[:, None] - pts[None, :])
    iu = np.triu_indices(pts.size, k=1)
    close = diff[iu] < DUPLICATE_TOL
    if np.any(close):
        k = int(np.argmax(close))
        raise DegenerateConstellation(f"points {iu[0][k]} and {iu[1][k]} coincide")

    if probs is None:
        p = np.full(pts.size, 1.0 / pts.size)
    else:
        p = np.array(probs, dtype=np.float64).ravel()
        if p.size != pts.size:
            raise InvalidDistribution(f"expected {pts.size} probabilities, got {p.size}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidDistribution("probabilities must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > PROB_SUM_TOL:
            raise InvalidDistribution(f"probabilities sum to {math.fsum(p)!r}, not 1")
    return Constellation(label, _freeze(pts), _freeze(p))


def normalize_energy(c: Constellation) -> Constellation:
    """Scale points to unit probability-weighted average energy."""
    e = c.energy
    if not e > 0:
        raise DegenerateConstellation("zero average energy")
    if e == 1.0:
        return c
    return Constellation(c.label, _freeze(c.points / math.sqrt(e)), c.probs)


def maxwell_boltzmann(points: np.ndarray, lam: float) -> np.ndarray:
    """Probabilities proportional to exp(-lam |x|^2), summed directly."""
    w = np.exp(-lam * np.abs(points) ** 2)
    p = w / math.fsum(w)
    # push the rounding residue onto the largest entry so the sum is 1 to ~1 ulp
    p[np.argmax(p)] += 1.0 - math.fsum(p)
    return p


# -- geometry builders (raw, un-normalized) ---------------------------------

def _psk(M: int, offset: float = 0.0) -> np.ndarray:
    k = np.arange(M)
    return np.exp(1j * (2.0 * np.pi * k / M + offset))


def _qam_side(M: int, scheme: Scheme) -> int:
    L = math.isqrt(M)
    if L * L != M or L < 2 or L % 2:
        raise UnsupportedScheme(f"{scheme.value} needs M = L^2 with even L, got M={M}")
    return L


def _qam_grid(L: int) -> np.ndarray:
    a = np.arange(-(L - 1), L, 2, dtype=np.float64)
    # row-major: imaginary part descending, real part ascending
    return (a[None, :] + 1j * a[::-1, None]).ravel()


def _hex_lattice(M: int) -> np.ndarray:
    # enumerate A2 points in a radius big enough to hold M points
    n = int(math.ceil(math.sqrt(M))) + 2
    i, j = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1))
    pts = (i + 0.5 * j).ravel() + 1j * (j * math.sqrt(3.0) / 2.0).ravel()
    norm2 = np.round(np.abs(pts) ** 2, 9)
    chosen: list[np.ndarray] = []
    need = M
    for r2 in np.unique(norm2):
        shell = pts[norm2 == r2]
        ang = np.mod(np.angle(shell), 2.0 * np.pi)
        ang[np.isclose(ang, 2.0 * np.pi)] = 0.0
        shell = shell[np.argsort(np.round(ang, 12), kind="stable")]
        if shell.size <= need:
            chosen.append(shell)
            need -= shell.size
        else:
            # partial outer shell: evenly spaced picks in angle order
            idx = [(q * shell.size) // need for q in range(need)]
            chosen.append(shell[idx])
            need = 0
        if need == 0:
            break
    return np.concatenate(chosen)


def _triangular(M: int) -> np.ndarray:
    if M < 3:
        raise UnsupportedScheme("Triangular needs M >= 3")
    pts = []
    row = 0
    h = math.sqrt(3.0) / 2.0
    while len(pts) < M:
        slots = row + 1
        take = min(slots, M - len(pts))
        start = (slots - take) // 2
        for j in range(start, start + take):
            pts.append(complex(j - row / 2.0, -row * h))
        row += 1
    z = np.array(pts)
    return z - z.mean()


def _apsk(M: int, params: Mapping[str, Any]) -> np.ndarray:
    if "rings" in params:
        rings = [int(k) for k in params["rings"]]
        radii = [float(r) for r in params["radii"]]
    elif M == 16:
        rings, radii = [4, 12], [1.0, 2.7]
    else:
        raise UnsupportedScheme(f"APSK M={M} needs explicit rings/radii")
    phases = [float(x) for x in params.get("phases", [0.0] * len(rings))]
    if not (len(rings) == len(radii) == len(phases)):
        raise UnsupportedScheme("APSK rings, radii and phases must have equal length")
    if sum(rings) != M:
        raise UnsupportedScheme(f"APSK ring counts sum to {sum(rings)}, not M={M}")
    if any(r <= 0 for r in radii) or any(k < 1 for k in rings):
        raise UnsupportedScheme("APSK radii must be positive and rings non-empty")
    return np.concatenate([rho * _psk(k, ph) for k, rho, ph in zip(rings, radii, phases)])


def _gam_angles(M: int) -> np.ndarray:
    k = np.arange(1, M + 1, dtype=np.float64)
    return k * GOLDEN_ANGLE


def bell_gam_default_lambda(M: int) -> float:
    """Rate giving unit pre-normalization mean energy for Bell-GAM."""
    k = np.arange(1, M + 1, dtype=np.float64)
    return float(np.mean(-np.log1p(-k / (M + 1))))


def _raw_points(spec: SchemeSpec) -> tuple[np.ndarray, np.ndarray | None]:
    s, M, prm = spec.scheme, int(spec.order), spec.params
    if M < 2:
        raise UnsupportedScheme(f"order must be >= 2, got {M}")

    if s is Scheme.BPSK:
        if M != 2:
            raise UnsupportedScheme("BPSK is defined for M=2 only")
        return np.array([1.0 + 0j, -1.0 + 0j]), None
    if s is Scheme.QPSK:
        if M != 4:
            raise UnsupportedScheme("QPSK is defined for M=4 only")
        return np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2.0), None
    if s is Scheme.MPSK:
        return _psk(M), None
    if s is Scheme.SquareQAM:
        return _qam_grid(_qam_side(M, s)), None
    if s is Scheme.ProbShapedQAM:
        lam = float(prm.get("lam", 0.1))
        if lam < 0:
            raise UnsupportedScheme("ProbShapedQAM needs lam >= 0")
        grid = _qam_grid(_qam_side(M, s))
        return grid, maxwell_boltzmann(grid, lam)
    if s is Scheme.Elliptical:
        alpha = float(prm.get("alpha", 1.0))
        beta = float(prm.get("beta", 0.5))
        if alpha <= 0 or beta <= 0:
            raise UnsupportedScheme("Elliptical needs alpha, beta > 0")
        grid = _qam_grid(_qam_side(M, s))
        return alpha * grid.real + 1j * beta * grid.imag, None
    if s is Scheme.CrossShaped:
        L = _qam_side(M, s)
        if L < 4:
            raise UnsupportedScheme("CrossShaped needs M >= 16")
        grid = _qam_grid(L)
        corner = (np.abs(grid.real) == L - 1) & (np.abs(grid.imag) == L - 1)
        axis = (L + 1) * np.array([1, 1j, -1, -1j])
        return np.concatenate([grid[~corner], axis]), None
    if s is Scheme.HexLattice:
        return _hex_lattice(M), None
    if s is Scheme.APSK:
        return _apsk(M, prm), None
    if s is Scheme.StarShaped:
        if M % 2:
            raise UnsupportedScheme("StarShaped needs even M")
        ratio = float(prm.get("inner_ratio", 0.5))
        if not 0 < ratio < 1:
            raise UnsupportedScheme("StarShaped inner_ratio must lie in (0, 1)")
        radius = np.where(np.arange(M) % 2 == 0, 1.0, ratio)
        return radius * _psk(M), None
    if s is Scheme.CircularAsymmetric:
        if M % 4:
            raise UnsupportedScheme("CircularAsymmetric needs M divisible by 4")
        ratio = float(prm.get("outer_ratio", 2.0))
        if ratio <= 1:
            raise UnsupportedScheme("CircularAsymmetric outer_ratio must exceed 1")
        n_out = 3 * M // 4
        return np.concatenate([_psk(M // 4), ratio * _psk(n_out, math.pi / n_out)]), None
    if s is Scheme.Triangular:
        return _triangular(M), None
    if s is Scheme.HexRing:
        if M < 8:
            raise UnsupportedScheme("HexRing needs M >= 8")
        r1 = float(prm.get("inner_radius", 1.0))
        r2 = float(prm.get("outer_radius", 2.0))
        if not 0 < r1 < r2:
            raise UnsupportedScheme("HexRing needs 0 < inner_radius < outer_radius")
        return np.concatenate([[0j], r1 * _psk(6), r2 * _psk(M - 7)]), None
    if s is Scheme.DiscGAM:
        k = np.arange(1, M + 1, dtype=np.float64)
        return np.sqrt(k / M) * np.exp(1j * _gam_angles(M)), None
    if s is Scheme.BellGAM:
        lam = float(prm.get("lam", bell_gam_default_lambda(M)))
        if lam <= 0:
            raise UnsupportedScheme("BellGAM needs lam > 0")
        k = np.arange(1, M + 1, dtype=np.float64)
        r = np.sqrt(-np.log1p(-k / (M + 1)) / lam)
        return r * np.exp(1j * _gam_angles(M)), None
    if s is Scheme.FromFile:
        c = read_constellation_csv(prm["path"])
        if c.M != M:
            raise UnsupportedScheme(f"file holds {c.M} points, spec says M={M}")
        return np.array(c.points), np.array(c.probs)
    raise UnsupportedScheme(f"unknown scheme {s!r}")


def default_label(spec: SchemeSpec) -> str:
    return spec.label or f"{spec.scheme.value}-{spec.order}"


def generate(spec: SchemeSpec) -> Constellation:
    """Produce the energy-normalized constellation described by ``spec``."""
    pts, probs = _raw_points(spec)
    c = make_constellation(pts, probs, default_label(spec))
    return normalize_energy(c)


# -- file format ------------------------------------------------------------

def write_constellation_csv(c: Constellation, path: str | Path) -> None:
    """Write ``index,re,im,prob`` rows with 9 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im", "prob"])
        for k, (z, p) in enumerate(zip(c.points, c.probs)):
            w.writerow([k, f"{z.real:.9g}", f"{z.imag:.9g}", f"{p:.9g}"])


def read_constellation_csv(path: str | Path, label: str | None = None) -> Constellation:
    """Read a constellation file; the ``prob`` column is optional.

    The result is not re-normalized. Probabilities read back at 9 significant
    digits are rescaled to sum to one.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        if not {"index", "re", "im"} <= set(cols):
            raise SchemaError(f"{path}: expected columns index,re,im[,prob], got {cols}")
        rows = sorted(reader, key=lambda r: int(r["index"]))
    try:
        pts = [complex(float(r["re"]), float(r["im"])) for r in rows]
        probs = None
        if "prob" in cols and any(r.get("prob") not in (None, "") for r in rows):
            raw = np.array([float(r["prob"]) for r in rows])
            if np.any(raw < 0) or abs(raw.sum() - 1.0) > 1e-6:
                raise InvalidDistribution(f"{path}: probabilities do not sum to 1")
            probs = raw / math.fsum(raw)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    return make_constellation(pts, probs, label if label is not None else path.stem)
