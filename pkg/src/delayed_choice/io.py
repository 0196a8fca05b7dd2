"""File formats: flat key-value configs, event tables, histograms, manifests."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .eraser import EraserConfig, JointDistribution
from .errors import ConfigError
from .runs import EventRecord, Histogram

EVENT_FIELDS = ("run_id", "experiment", "screen_bin", "x_position", "detector")

_INT_FIELDS = {"N"}
_STR_FIELDS = {"envelope"}


def _format_float(x: float) -> str:
    return repr(float(x))


def parse_config_text(text: str) -> EraserConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Unknown keys are errors."""
    known = set(EraserConfig.field_names())
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("<line %d>" % lineno, f"expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "given more than once")
        try:
            if key in _INT_FIELDS:
                values[key] = int(value)
            elif key in _STR_FIELDS:
                values[key] = value
            else:
                values[key] = float(value)
        except ValueError:
            raise ConfigError(key, f"cannot parse {value!r}") from None
    return EraserConfig(**values)


def load_config(path: str | Path) -> EraserConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def format_config(cfg: EraserConfig) -> str:
    lines = []
    for key, value in asdict(cfg).items():
        if isinstance(value, float):
            value = "inf" if math.isinf(value) else _format_float(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _config_json(cfg: EraserConfig) -> dict:
    # JSON has no infinity; the text form round-trips through float()
    return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in asdict(cfg).items()}


def config_from_json(data: dict) -> EraserConfig:
    values = {}
    for key, value in data.items():
        if key not in EraserConfig.field_names():
            raise ConfigError(key, "unknown key")
        values[key] = float(value) if value == "inf" else value
    return EraserConfig(**values)


def event_row(ev: EventRecord) -> list[str]:
    return [
        str(ev.run_id),
        ev.experiment,
        "" if ev.screen_bin is None else str(ev.screen_bin),
        "" if ev.x_position is None else _format_float(ev.x_position),
        ev.detector,
    ]


def write_events_csv(path: str | Path, events: Sequence[EventRecord]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_FIELDS)
        w.writerows(event_row(ev) for ev in events)


def write_events_json(path: str | Path, events: Sequence[EventRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([asdict(ev) for ev in events], fh, ensure_ascii=False)
        fh.write("\n")


def read_events_csv(path: str | Path) -> list[EventRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            EventRecord(
                int(row["run_id"]),
                row["experiment"],
                int(row["screen_bin"]) if row["screen_bin"] else None,
                float(row["x_position"]) if row["x_position"] else None,
                row["detector"],
            )
            for row in reader
        ]


def write_histograms_csv(path: str | Path, hists: dict[str, Histogram]) -> None:
    """Wide table: bin edges and centre, then one count column per group."""
    groups = list(hists)
    first = hists[groups[0]]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "bin_center", *groups])
        for i in range(first.counts.size):
            w.writerow(
                [
                    _format_float(first.bin_edges[i]),
                    _format_float(first.bin_edges[i + 1]),
                    _format_float(first.centers[i]),
                    *(str(int(hists[g].counts[i])) for g in groups),
                ]
            )


def write_distribution(path: str | Path, joint: JointDistribution, fmt: str = "csv") -> None:
    """(bin centre, detector, probability) triples."""
    triples = joint.triples()
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                [{"x": x, "detector": d, "probability": p} for x, d, p in triples], fh
            )
            fh.write("\n")
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "detector", "probability"])
        w.writerows([_format_float(x), d, _format_float(p)] for x, d, p in triples)


def write_curves_csv(path: str | Path, joint: JointDistribution, envelope: JointDistribution) -> None:
    """Per-detector fringe curves P(x_k, D_j), their no-fringe envelopes and the total."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(
            ["screen_bin", "x", *joint.detectors, *(f"{d}_envelope" for d in joint.detectors), "ALL"]
        )
        marginal = joint.screen_marginal
        for k in range(joint.x.size):
            w.writerow(
                [
                    str(k),
                    _format_float(joint.x[k]),
                    *(_format_float(v) for v in joint.probs[k]),
                    *(_format_float(v) for v in envelope.probs[k]),
                    _format_float(marginal[k]),
                ]
            )


@dataclass
class RunManifest:
    command: str
    experiment: str
    config: dict | str
    n_runs: int
    seed: int
    format: str
    n_bins: int | None
    tool_version: str
    output_paths: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def read(cls, path: str | Path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))

    def eraser_config(self) -> EraserConfig | None:
        return config_from_json(self.config) if isinstance(self.config, dict) else None


def manifest_config(cfg: EraserConfig | None) -> dict | str:
    return _config_json(cfg) if cfg is not None else "wheeler defaults"
