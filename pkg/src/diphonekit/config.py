"""Experiment configuration: dataclasses with an INI-file loader."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional


@dataclass(frozen=True)
class ConfidenceThresholds:
    """Calibration of the simulated speaker-match scorer.

    ``fraction >= high`` gives 300; ``>= coin`` gives 300 with probability
    ``coin_p300`` else 200; ``>= medium`` gives 200; ``>= low`` gives 100;
    anything lower gives 0.
    """

    high: float = 0.8
    coin: float = 0.5
    medium: float = 0.2
    low: float = 0.05
    coin_p300: float = 0.5

    def __post_init__(self):
        if not (1 >= self.high >= self.coin >= self.medium >= self.low >= 0):
            raise ValueError("confidence thresholds must satisfy 1 >= high >= coin >= medium >= low >= 0")
        if not 0 <= self.coin_p300 <= 1:
            raise ValueError("coin_p300 must be a probability")


@dataclass(frozen=True)
class NoiseModel:
    """Per-word substitution probability in the oracle transcript channel:
    ``base + donor_rate * donor_unit_fraction + join_rate * joins``."""

    base: float = 0.0
    donor_rate: float = 0.3
    join_rate: float = 0.0


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    crossfade_ms: float = 0.0
    mask_fraction: float = 1.0
    use_word_units: bool = True
    # CSV exported by `diphonekit freq`; needed when mask_fraction < 1
    freq_table: Optional[str] = None
    # optional credit for units from another profile of the target's gender (0 = pure provenance)
    same_gender_affinity: float = 0.0
    donors: dict[str, str] = field(default_factory=dict)
    confidence: ConfidenceThresholds = field(default_factory=ConfidenceThresholds)
    noise: NoiseModel = field(default_factory=NoiseModel)

    def replace(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def _coerce(cls, section: configparser.SectionProxy, name: str):
    kwargs = {}
    for f in fields(cls):
        if f.name not in section:
            continue
        raw = section[f.name]
        default = f.default
        if isinstance(default, bool):
            kwargs[f.name] = section.getboolean(f.name)
        elif isinstance(default, int):
            kwargs[f.name] = int(raw)
        elif isinstance(default, float):
            kwargs[f.name] = float(raw)
        else:
            kwargs[f.name] = raw or None
    unknown = set(section) - {f.name for f in fields(cls)} - set(section.parser.defaults())
    if unknown:
        raise ValueError(f"[{name}]: unknown keys {sorted(unknown)}")
    return kwargs


def load_config(path: Optional[str | Path] = None) -> ExperimentConfig:
    """Read ``[experiment]``, ``[donors]``, ``[confidence]`` and ``[noise]`` sections."""
    if path is None:
        return ExperimentConfig()
    parser = configparser.ConfigParser()
    with open(path) as f:
        parser.read_file(f)
    exp = {}
    if parser.has_section("experiment"):
        exp = _coerce(ExperimentConfig, parser["experiment"], "experiment")
        exp.pop("confidence", None)
        exp.pop("noise", None)
        exp.pop("donors", None)
    if parser.has_section("donors"):
        exp["donors"] = dict(parser["donors"])
    if parser.has_section("confidence"):
        exp["confidence"] = ConfidenceThresholds(**_coerce(ConfidenceThresholds, parser["confidence"], "confidence"))
    if parser.has_section("noise"):
        exp["noise"] = NoiseModel(**_coerce(NoiseModel, parser["noise"], "noise"))
    return ExperimentConfig(**exp)
