"""Geometric and analytic performance metrics of a constellation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from constkit.constellation import Constellation, Scheme
from constkit.errors import UnsupportedScheme
from constkit.rng import derive_stream

PACKING_SQUARE = math.pi / 4.0
PACKING_HEX = math.pi / (2.0 * math.sqrt(3.0))

MERGE_TOL = 1e-9


@dataclass(frozen=True)
class SnrSpec:
    """Per-symbol SNR under unit symbol energy."""

    snr_db: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")

    @property
    def gamma_s(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def n0(self) -> float:
        return 1.0 / self.gamma_s

    def gamma_b(self, M: int) -> float:
        return self.gamma_s / math.log2(M)


def as_snr(snr: SnrSpec | float) -> SnrSpec:
    return snr if isinstance(snr, SnrSpec) else SnrSpec(float(snr))


def qfunc(x):
    """Gaussian tail probability Q(x) = 0.5 erfc(x / sqrt(2))."""
    return 0.5 * special.erfc(np.asarray(x, dtype=np.float64) / math.sqrt(2.0))


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Condensed vector of the M(M-1)/2 pairwise distances, row-major i<j."""
    iu = np.triu_indices(points.size, k=1)
    return np.abs(points[iu[0]] - points[iu[1]])


def min_distance(c: Constellation) -> float:
    return float(pairwise_distances(c.points).min())


def mean_distance(c: Constellation) -> float:
    return float(pairwise_distances(c.points).mean())


@dataclass(frozen=True)
class DistanceSpectrum:
    distances: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __iter__(self):
        return iter(zip(self.distances, self.multiplicities))

    @property
    def total_pairs(self) -> int:
        return sum(self.multiplicities)


def distance_spectrum(c: Constellation) -> DistanceSpectrum:
    """Sorted distinct pair distances with counts; values within 1e-9 merge.

    Each merged group is represented by its smallest member, so the first
    entry is exactly ``min_distance``.
    """
    d = np.sort(pairwise_distances(c.points))
    dists: list[float] = []
    counts: list[int] = []
    anchor = None
    for x in d:
        if anchor is not None and x - anchor <= MERGE_TOL:
            counts[-1] += 1
        else:
            anchor = x
            dists.append(float(x))
            counts.append(1)
    return DistanceSpectrum(tuple(dists), tuple(counts))


def papr_linear(c: Constellation) -> float:
    p = np.abs(c.points) ** 2
    return float(p.max() / np.dot(c.probs, p))


def papr_db(c: Constellation) -> float:
    return 10.0 * math.log10(papr_linear(c))


def union_bound_ser(c: Constellation, snr: SnrSpec | float) -> float:
    """Union bound on ML symbol error probability; not clamped to 1.

    Each transmitted point is weighted by its probability, which reduces to the
    usual 1/M average for uniform constellations.
    """
    snr = as_snr(snr)
    d2 = np.abs(c.points[:, None] - c.points[None, :]) ** 2
    pe = qfunc(np.sqrt(d2 / (2.0 * snr.n0)))
    np.fill_diagonal(pe, 0.0)
    return float(np.dot(c.probs, pe.sum(axis=1)))


def _awgn_ser(scheme: Scheme, M: int, gamma):
    g = np.asarray(gamma, dtype=np.float64)
    if scheme is Scheme.BPSK or (scheme is Scheme.MPSK and M == 2):
        return qfunc(np.sqrt(2.0 * g))
    if scheme is Scheme.QPSK:
        q = qfunc(np.sqrt(g))
        return 2.0 * q - q * q
    if scheme is Scheme.MPSK:
        return 2.0 * qfunc(np.sqrt(2.0 * g) * math.sin(math.pi / M))
    if scheme is Scheme.SquareQAM:
        p = 2.0 * (1.0 - 1.0 / math.sqrt(M)) * qfunc(np.sqrt(3.0 * g / (M - 1)))
        return 1.0 - (1.0 - p) ** 2
    raise UnsupportedScheme(f"no closed form for {scheme}")


def _check_order(scheme: Scheme, M: int) -> None:
    ok = {
        Scheme.BPSK: M == 2,
        Scheme.QPSK: M == 4,
        Scheme.MPSK: M >= 2,
        Scheme.SquareQAM: math.isqrt(M) ** 2 == M and M >= 4,
    }
    if not ok.get(scheme, False):
        raise UnsupportedScheme(f"no closed-form SER for {scheme.value} with M={M}")


def analytic_ser(scheme: Scheme | str, M: int, snr: SnrSpec | float,
                 channel: str = "AWGN") -> float:
    """Closed-form SER on AWGN, or its Rayleigh average by quadrature.

    The Rayleigh value integrates the AWGN expression against the exponential
    density of the instantaneous SNR.
    """
    try:
        scheme = Scheme(scheme)
    except ValueError as exc:
        raise UnsupportedScheme(str(exc)) from exc
    _check_order(scheme, M)
    snr = as_snr(snr)
    g = snr.gamma_s
    kind = channel.upper()
    if kind == "AWGN":
        return float(_awgn_ser(scheme, M, g))
    if kind in ("RAYLEIGH", "RAYLEIGHFLAT"):
        val, _ = integrate.quad(lambda t: float(_awgn_ser(scheme, M, g * t)) * math.exp(-t),
                                0.0, math.inf, epsrel=1e-9, epsabs=0.0, limit=200)
        return float(val)
    raise ValueError(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class MutualInformation:
    bits: float
    stderr: float


def mutual_information(c: Constellation, snr: SnrSpec | float, n_samples: int = 100_000,
                       seed: int = 0, n_batches: int = 10) -> MutualInformation:
    """Monte Carlo I(X;Y) in bits for the discrete input over complex AWGN.

    Uses the exact Gaussian likelihoods; the standard error comes from batch
    means.
    """
    if n_samples < 10_000:
        raise ValueError("n_samples must be at least 1e4")
    snr = as_snr(snr)
    n0 = snr.n0
    s = derive_stream(seed, ("mutual-information", c.label, repr(float(snr.snr_db))))
    idx = s.choice(c.probs, n_samples)
    noise = math.sqrt(n0) * s.complex_normal(n_samples)
    x = c.points[idx]
    y = x + noise
    # log p(y|s_j) - log p(y|x) = -(|y - s_j|^2 - |noise|^2) / N0
    expo = -(np.abs(y[:, None] - c.points[None, :]) ** 2 - np.abs(noise)[:, None] ** 2) / n0
    log_ratio = special.logsumexp(expo, axis=1, b=c.probs[None, :])
    info = -log_ratio / math.log(2.0)
    batches = np.array([b.mean() for b in np.array_split(info, n_batches)])
    return MutualInformation(float(info.mean()), float(batches.std(ddof=1) / math.sqrt(n_batches)))
