"""End-to-end runs: physics distribution -> sampled events -> grouped histograms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import eraser, wheeler
from .runs import (
    ALL,
    DEFAULT_BINS,
    ERASER_EXPERIMENTS,
    EXPERIMENTS,
    EventRecord,
    Histogram,
    binned,
    group_histograms,
    screen_bin_edges,
    simulate_runs,
)


def parse_experiment(name: str) -> tuple[str, int]:
    """``'eraser2'`` -> ``('eraser', 2)``."""
    if name not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    return name[:-1], int(name[-1])


def experiment_distribution(name: str, cfg: eraser.EraserConfig | None = None) -> dict:
    kind, number = parse_experiment(name)
    if kind == "wheeler":
        return wheeler.detector_distribution(number)
    return eraser.joint_distribution(cfg or eraser.EraserConfig(), number).as_map()


def run_experiment(
    name: str, n_runs: int, seed: int, cfg: eraser.EraserConfig | None = None
) -> list[EventRecord]:
    kind, number = parse_experiment(name)
    if kind == "wheeler":
        return simulate_runs(wheeler.detector_distribution(number), n_runs, seed, name)
    cfg = cfg or eraser.EraserConfig()
    joint = eraser.joint_distribution(cfg, number)
    return simulate_runs(joint.as_map(), n_runs, seed, name, positions=joint.x)


@dataclass(frozen=True)
class FringeData:
    """Observed histograms with matching expected and no-fringe envelope counts."""

    experiment: str
    n_runs: int
    bin_edges: np.ndarray
    histograms: dict[str, Histogram]
    expected: dict[str, np.ndarray]
    envelopes: dict[str, np.ndarray]


def eraser_fringes(
    name: str,
    n_runs: int,
    seed: int,
    cfg: eraser.EraserConfig | None = None,
    n_bins: int = DEFAULT_BINS,
    events: list[EventRecord] | None = None,
) -> FringeData:
    if name not in ERASER_EXPERIMENTS:
        raise ValueError(f"{name!r} is not an eraser experiment")
    cfg = cfg or eraser.EraserConfig()
    number = int(name[-1])
    joint = eraser.joint_distribution(cfg, number)
    envelope = eraser.incoherent_envelope(cfg, number)
    edges = screen_bin_edges(joint.x, n_bins)
    if events is None:
        events = simulate_runs(joint.as_map(), n_runs, seed, name, positions=joint.x)
    hists = group_histograms(events, edges, joint.detectors)
    expected, envelopes = {}, {}
    for j, det in enumerate(joint.detectors):
        expected[det] = n_runs * binned(joint.x, joint.probs[:, j], edges)
        envelopes[det] = n_runs * binned(joint.x, envelope.probs[:, j], edges)
    expected[ALL] = n_runs * binned(joint.x, joint.screen_marginal, edges)
    envelopes[ALL] = expected[ALL]
    return FringeData(name, n_runs, edges, hists, expected, envelopes)
