"""Seeded Monte Carlo runs, coincidence grouping, histograms and fringe statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .errors import DegenerateTestError, SpanError
from .qcore import check_distribution, inverse_cdf, run_uniforms

WHEELER_EXPERIMENTS = ("wheeler1", "wheeler2", "wheeler3")
ERASER_EXPERIMENTS = ("eraser1", "eraser2", "eraser3")
EXPERIMENTS = WHEELER_EXPERIMENTS + ERASER_EXPERIMENTS

WHEELER_DETECTORS = {
    "wheeler1": ("↑", "↓"),
    "wheeler2": ("↑", "↓"),
    "wheeler3": ("↑off", "↑on", "↓off", "↓on"),
}
ERASER_DETECTORS = {
    "eraser1": ("D1", "D2"),
    "eraser2": ("D1", "D2"),
    "eraser3": ("D1", "D2", "D3", "D4"),
}

ALL = "ALL"
DEFAULT_BINS = 48
# runs sampled per chunk; only bounds memory, results do not depend on it
CHUNK = 1 << 16


@dataclass(frozen=True)
class EventRecord:
    run_id: int
    experiment: str
    screen_bin: int | None
    x_position: float | None
    detector: str

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        is_eraser = self.experiment in ERASER_EXPERIMENTS
        if is_eraser != (self.screen_bin is not None):
            raise ValueError("screen_bin must be present exactly for eraser experiments")
        legal = (ERASER_DETECTORS if is_eraser else WHEELER_DETECTORS)[self.experiment]
        if self.detector not in legal:
            raise ValueError(f"detector {self.detector!r} not legal for {self.experiment}")


def simulate_runs(
    dist: Mapping,
    n_runs: int,
    seed: int,
    experiment: str,
    positions: Sequence[float] | None = None,
) -> list[EventRecord]:
    """Sample ``n_runs`` outcomes; run ``i`` uses the stream ``(seed, i)``.

    Wheeler maps are keyed by detector label.  Eraser maps are keyed by
    ``(screen_bin, detector)`` and need ``positions[screen_bin]``.
    """
    if not dist:
        raise ValueError("empty distribution")
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    labels = list(dist)
    p = check_distribution(list(dist.values()))
    eraser = experiment in ERASER_EXPERIMENTS
    if eraser and positions is None:
        raise ValueError("eraser runs need screen positions")

    picks = np.concatenate(
        [
            inverse_cdf(p, run_uniforms(seed, start, min(start + CHUNK, n_runs)))
            for start in range(0, n_runs, CHUNK)
        ]
    )
    events = []
    for run_id, idx in enumerate(picks.tolist()):
        label = labels[idx]
        if eraser:
            k, det = label
            events.append(EventRecord(run_id, experiment, int(k), float(positions[k]), det))
        else:
            events.append(EventRecord(run_id, experiment, None, None, label))
    return events


def group_events(events: Iterable[EventRecord]) -> dict[str, list[EventRecord]]:
    """Partition events by detector label, keeping input order within groups."""
    groups: dict[str, list[EventRecord]] = {}
    for ev in events:
        groups.setdefault(ev.detector, []).append(ev)
    return groups


@dataclass(frozen=True)
class Histogram:
    group: str
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def _check_edges(bin_edges) -> np.ndarray:
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("bin edges must be a strictly increasing sequence of length >= 2")
    return edges


def histogram(events: Iterable[EventRecord], bin_edges, group: str = ALL) -> Histogram:
    """Count x positions per bin; the last bin includes its right edge."""
    edges = _check_edges(bin_edges)
    xs = np.array([ev.x_position for ev in events], dtype=float)
    if np.any(np.isnan(xs)):
        raise ValueError("events without a screen position cannot be histogrammed")
    if xs.size and (xs.min() < edges[0] or xs.max() > edges[-1]):
        raise SpanError(f"events outside [{edges[0]}, {edges[-1]}]")
    counts, _ = np.histogram(xs, bins=edges)
    return Histogram(group, edges, counts.astype(np.int64))


def group_histograms(events: Sequence[EventRecord], bin_edges, detectors: Sequence[str]) -> dict[str, Histogram]:
    """One histogram per detector (empty groups included) plus ``ALL``."""
    groups = group_events(events)
    out = {det: histogram(groups.get(det, []), bin_edges, det) for det in detectors}
    out[ALL] = histogram(events, bin_edges, ALL)
    return out


def screen_bin_edges(x: np.ndarray, n_bins: int = DEFAULT_BINS) -> np.ndarray:
    """Edges grouping the sorted screen points into ``n_bins`` contiguous runs.

    Edges sit halfway between neighbouring points, so every screen point falls
    strictly inside one bin.  ``n_bins`` is capped at the number of points.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    n_bins = min(n_bins, n)
    owner = (np.arange(n) * n_bins) // n
    firsts = np.flatnonzero(np.diff(owner)) + 1
    inner = 0.5 * (x[firsts - 1] + x[firsts])
    lo = x[0] - 0.5 * (x[1] - x[0]) if n > 1 else x[0] - 0.5
    hi = x[-1] + 0.5 * (x[-1] - x[-2]) if n > 1 else x[-1] + 0.5
    return np.concatenate([[lo], inner, [hi]])


def binned(x: np.ndarray, weights: np.ndarray, bin_edges) -> np.ndarray:
    """Sum per-point weights into bins (for expected counts and envelopes)."""
    edges = _check_edges(bin_edges)
    out, _ = np.histogram(x, bins=edges, weights=weights)
    return out


class Visibility(NamedTuple):
    value: float
    lo: int
    hi: int


def central_region(bin_edges, fraction: float = 0.5) -> tuple[int, int]:
    """Bins ``lo .. hi-1`` whose centres lie in the central ``fraction`` of the span."""
    edges = _check_edges(bin_edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mid = 0.5 * (edges[0] + edges[-1])
    half = 0.5 * fraction * (edges[-1] - edges[0])
    inside = np.flatnonzero(np.abs(centers - mid) <= half)
    return int(inside[0]), int(inside[-1]) + 1


def normalized_counts(h: Histogram, envelope) -> np.ndarray:
    env = np.asarray(envelope, dtype=float)
    if env.shape != h.counts.shape:
        raise ValueError("envelope must have one entry per bin")
    return np.divide(h.counts, env, out=np.full(env.shape, np.nan), where=env > 0)


def visibility(h: Histogram, envelope, fraction: float = 0.5) -> Visibility:
    """(max - min) / (max + min) of envelope-normalized counts over the central region."""
    if h.total == 0:
        raise ValueError("empty histogram")
    lo, hi = central_region(h.bin_edges, fraction)
    env = np.asarray(envelope, dtype=float)[lo:hi]
    if np.any(env <= 0):
        raise ValueError("envelope must be positive on the fringe region")
    r = normalized_counts(h, envelope)[lo:hi]
    top, bottom = r.max(), r.min()
    if top + bottom == 0:
        return Visibility(0.0, lo, hi)
    return Visibility(float((top - bottom) / (top + bottom)), lo, hi)


def peaks_anti_aligned(
    a: Histogram, env_a, b: Histogram, env_b, window: int = 3, fraction: float = 0.5
) -> bool:
    """Whether each group's peak bin sits within one bin of the other's minimum.

    The minimum is searched within ``window`` bins of the peak, so with several
    fringes in the region the check looks at the fringe under the peak.
    """

    def check(peak_h, peak_env, dip_h, dip_env) -> bool:
        lo, hi = central_region(peak_h.bin_edges, fraction)
        r_peak = normalized_counts(peak_h, peak_env)
        r_dip = normalized_counts(dip_h, dip_env)
        peak = lo + int(np.nanargmax(r_peak[lo:hi]))
        w_lo, w_hi = max(peak - window, 0), min(peak + window + 1, r_dip.size)
        dip = w_lo + int(np.nanargmin(r_dip[w_lo:w_hi]))
        return abs(dip - peak) <= 1

    return check(a, env_a, b, env_b) and check(b, env_b, a, env_a)


class ChiSquare(NamedTuple):
    statistic: float
    dof: int
    p_value: float


def pool_bins(expected: np.ndarray, threshold: float = 5.0) -> list[np.ndarray]:
    """Index groups such that every group's expected count reaches ``threshold``.

    Bins below the threshold are pooled together; if that pool is still short
    it is merged into the smallest adequate bin.
    """
    big = [np.array([i]) for i in np.flatnonzero(expected >= threshold)]
    small = np.flatnonzero(expected < threshold)
    if small.size == 0:
        return big
    if expected[small].sum() >= threshold or not big:
        return big + [small]
    j = int(np.argmin([expected[g].sum() for g in big]))
    big[j] = np.concatenate([big[j], small])
    return big


def chi_square_gof(h: Histogram | Sequence[int], expected_probs, n: int | None = None, threshold: float = 5.0) -> ChiSquare:
    """Pearson goodness of fit of observed counts against expected probabilities."""
    counts = np.asarray(h.counts if isinstance(h, Histogram) else h, dtype=float)
    p = check_distribution(expected_probs)
    if p.shape != counts.shape:
        raise ValueError("expected probabilities must match the number of bins")
    n = int(counts.sum()) if n is None else n
    expected = p * n
    groups = pool_bins(expected, threshold)
    if len(groups) < 2:
        raise DegenerateTestError("fewer than two bins after pooling")
    obs = np.array([counts[g].sum() for g in groups])
    exp = np.array([expected[g].sum() for g in groups])
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(groups) - 1
    return ChiSquare(stat, dof, float(stats.chi2.sf(stat, dof)))


def label_counts(events: Iterable[EventRecord], labels: Sequence[str]) -> np.ndarray:
    index = {lab: i for i, lab in enumerate(labels)}
    counts = np.zeros(len(labels), dtype=np.int64)
    for ev in events:
        counts[index[ev.detector]] += 1
    return counts
