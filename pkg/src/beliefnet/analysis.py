"""Measurements on finished networks.

All functions here are read-only with respect to the network.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, shortest_path

from .network import SignedNetwork

EXACT_DIAMETER_LIMIT = 2000


class InsufficientDataError(ValueError):
    pass


@dataclass
class DegreeHistogram:
    """Normalised degree distribution.

    ``support`` counts, per degree, how many source histograms had a non-empty
    bin there (1 for a single network).
    """

    probs: dict[int, float]
    n_vertices: float
    n_runs: int = 1
    support: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.support:
            self.support = {k: 1 for k, p in self.probs.items() if p > 0}

    def ks(self) -> list[int]:
        return sorted(self.probs)

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def rows(self) -> list[tuple[int, float]]:
        return [(k, self.probs[k]) for k in self.ks()]


@dataclass(frozen=True)
class PowerLawFit:
    gamma: float
    intercept: float
    r_squared: float
    k_min: int
    k_max: int
    n_bins: int

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "k_min": self.k_min,
            "k_max": self.k_max,
        }


@dataclass(frozen=True)
class PeakInfo:
    """A high-degree peak separated from the bulk by a gap of empty bins."""

    bulk_max: int  # last non-empty degree of the bulk
    peak_min: int
    peak_max: int
    mass: float
    mean_k: float

    @property
    def gap_decades(self) -> float:
        return math.log10(self.peak_min / self.bulk_max)


def degree_distribution(net: SignedNetwork) -> DegreeHistogram:
    n = net.number_of_vertices
    if n == 0:
        raise ValueError("degree distribution of an empty network")
    counts = Counter(net.degree(v) for v in net.vertices())
    return DegreeHistogram({k: c / n for k, c in sorted(counts.items())}, n)


def average_histograms(hists: Sequence[DegreeHistogram]) -> DegreeHistogram:
    if not hists:
        raise ValueError("nothing to average")
    m = len(hists)
    acc: dict[int, float] = {}
    support: Counter[int] = Counter()
    n_runs = 0
    for h in hists:
        n_runs += h.n_runs
        for k, p in h.probs.items():
            acc[k] = acc.get(k, 0.0) + p * h.n_runs
        support.update(h.support)
    probs = {k: acc[k] / n_runs for k in sorted(acc)}
    n_vertices = sum(h.n_vertices * h.n_runs for h in hists) / n_runs
    return DegreeHistogram(probs, n_vertices, n_runs, dict(sorted(support.items())))


def default_fit_window(hist: DegreeHistogram, min_support: int = 5) -> tuple[int, int]:
    """k_min = 2; k_max = largest k seen in at least ``min_support`` runs.

    With fewer runs than ``min_support`` the largest non-empty k is used.
    """
    nonempty = [k for k, p in hist.probs.items() if p > 0]
    if not nonempty:
        raise InsufficientDataError("histogram has no mass")
    if hist.n_runs < min_support:
        return 2, max(nonempty)
    supported = [k for k, s in hist.support.items() if s >= min_support]
    return 2, max(supported) if supported else max(nonempty)


def fit_power_law(hist: DegreeHistogram, k_min: int | None = None, k_max: int | None = None) -> PowerLawFit:
    """Least squares of log10 P(k) on log10 k over non-empty bins in [k_min, k_max]."""
    if k_min is None or k_max is None:
        dmin, dmax = default_fit_window(hist)
        k_min = dmin if k_min is None else k_min
        k_max = dmax if k_max is None else k_max
    pts = [(k, p) for k, p in hist.probs.items() if k_min <= k <= k_max and k > 0 and p > 0]
    if len(pts) < 3:
        raise InsufficientDataError(f"need >= 3 non-empty bins in [{k_min}, {k_max}], got {len(pts)}")
    x = np.log10([k for k, _ in pts])
    y = np.log10([p for _, p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(-float(slope), float(intercept), r2, k_min, k_max, len(pts))


def find_peak(hist: DegreeHistogram, min_gap_decades: float = 0.3, max_mass: float = 0.05) -> PeakInfo | None:
    """Locate an isolated high-degree peak.

    Looks at gaps between consecutive non-empty bins whose upper side holds at
    most ``max_mass`` of the distribution, and takes the widest one in log k.
    Returns None unless it spans ``min_gap_decades``.
    """
    ks = [k for k in hist.ks() if k > 0 and hist.probs[k] > 0]
    if len(ks) < 2:
        return None
    tail = np.cumsum([hist.probs[k] for k in reversed(ks)])[::-1]  # mass at or above ks[j]
    best = None
    for j in range(1, len(ks)):
        if tail[j] > max_mass:
            continue
        width = math.log10(ks[j] / ks[j - 1])
        if best is None or width > best[0]:
            best = (width, j)
    if best is None or best[0] < min_gap_decades:
        return None
    j = best[1]
    upper = ks[j:]
    mass = math.fsum(hist.probs[k] for k in upper)
    mean_k = math.fsum(k * hist.probs[k] for k in upper) / mass
    return PeakInfo(ks[j - 1], upper[0], upper[-1], mass, mean_k)


def widest_tail_gap(hist: DegreeHistogram, max_mass: float = 0.05) -> float:
    """Widest empty stretch (in decades of k) inside the upper ``max_mass`` tail."""
    peak = find_peak(hist, 0.0, max_mass)
    return 0.0 if peak is None else peak.gap_decades


def split_peak(hist: DegreeHistogram, peak: PeakInfo | None) -> DegreeHistogram:
    """Histogram with the peak bins dropped (not renormalised)."""
    if peak is None:
        return hist
    probs = {k: p for k, p in hist.probs.items() if k < peak.peak_min}
    support = {k: s for k, s in hist.support.items() if k < peak.peak_min}
    return DegreeHistogram(probs, hist.n_vertices, hist.n_runs, support)


# -- distances -------------------------------------------------------------


def _csr(net: SignedNetwork, vertices: Sequence[int]) -> csr_matrix:
    index = {v: n for n, v in enumerate(vertices)}
    rows, cols = [], []
    for u, v, _ in net.edges():
        if u in index and v in index:
            rows += (index[u], index[v])
            cols += (index[v], index[u])
    n = len(vertices)
    return csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))


def component_sizes(net: SignedNetwork) -> list[int]:
    verts = net.vertices()
    if not verts:
        return []
    _, labels = connected_components(_csr(net, verts), directed=False)
    return sorted(np.bincount(labels).tolist(), reverse=True)


def largest_component(net: SignedNetwork) -> list[int]:
    verts = net.vertices()
    if not verts:
        return []
    _, labels = connected_components(_csr(net, verts), directed=False)
    big = int(np.bincount(labels).argmax())
    return [v for v, lab in zip(verts, labels) if lab == big]


def exact_mean_distance(net: SignedNetwork) -> float:
    verts = largest_component(net)
    n = len(verts)
    if n < 2:
        raise ValueError("mean distance needs at least two connected vertices")
    dist = shortest_path(_csr(net, verts), method="D", directed=False, unweighted=True)
    return float(dist.sum() / (n * (n - 1)))


def sampled_mean_distance(net: SignedNetwork, sample_pairs: int, rng: random.Random) -> tuple[float, float]:
    """Monte Carlo mean over random vertex pairs of the largest component.

    Returns (mean, standard error).
    """
    verts = largest_component(net)
    n = len(verts)
    if n < 2:
        raise ValueError("mean distance needs at least two connected vertices")
    pairs = []
    for _ in range(sample_pairs):
        a = rng.randrange(n)
        b = rng.randrange(n - 1)
        if b >= a:
            b += 1
        pairs.append((a, b))
    sources = sorted({a for a, _ in pairs})
    row = {s: r for r, s in enumerate(sources)}
    dist = shortest_path(_csr(net, verts), method="D", directed=False, unweighted=True, indices=sources)
    d = np.array([dist[row[a], b] for a, b in pairs])
    sem = float(d.std(ddof=1) / math.sqrt(len(d))) if len(d) > 1 else float("inf")
    return float(d.mean()), sem


def diameter(net: SignedNetwork, sample_pairs: int | None = None, rng: random.Random | None = None) -> float:
    """Mean shortest-path length over vertex pairs of the largest component.

    Exact when the component has at most 2000 vertices (or ``sample_pairs``
    is None and no generator is given); otherwise estimated from
    ``sample_pairs`` random pairs.
    """
    n = len(largest_component(net))
    if n < 2:
        raise ValueError("mean distance needs at least two connected vertices")
    if n <= EXACT_DIAMETER_LIMIT or (sample_pairs is None and rng is None):
        return exact_mean_distance(net)
    return sampled_mean_distance(net, sample_pairs or 2000, rng or random.Random(0))[0]


# -- degree by insertion order ---------------------------------------------


@dataclass
class DegreeByOrdinal:
    mean_degree: np.ndarray  # nan where the ordinal never survived
    survivors: np.ndarray

    def decile_means(self) -> list[float]:
        """Survivor-weighted mean degree of each tenth of the ordinal range."""
        n = len(self.mean_degree)
        out = []
        for d in range(10):
            lo, hi = d * n // 10, (d + 1) * n // 10
            s = self.survivors[lo:hi]
            m = np.nan_to_num(self.mean_degree[lo:hi])
            out.append(float((m * s).sum() / s.sum()) if s.sum() else float("nan"))
        return out


def degree_by_ordinal(runs: Iterable[SignedNetwork], n_points: int | None = None) -> DegreeByOrdinal:
    runs = list(runs)
    if n_points is None:
        n_points = max((net.attrs(v).ordinal for net in runs for v in net.vertices()), default=-1) + 1
    total = np.zeros(n_points)
    count = np.zeros(n_points, dtype=np.int64)
    for net in runs:
        for v in net.vertices():
            o = net.attrs(v).ordinal
            if o < n_points:
                total[o] += net.degree(v)
                count[o] += 1
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return DegreeByOrdinal(mean, count)
