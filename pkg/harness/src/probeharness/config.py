"""Harness configuration: backbones, class split, sweep levels, budgets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping


@dataclass(frozen=True)
class HarnessConfig:
    """One toy evaluation sweep.

    Backbones are tiny convolutional feature extractors identified by
    width; they are pretrained in-run (seeded, on digit classes disjoint
    from the vocabulary) so the sweep never needs network access. The
    vocabulary digits split into seen (probe training) and unseen
    (zero-shot) classes.
    """

    seed: int = 0
    backbone_widths: tuple[int, ...] = (6, 12)
    vocabulary_digits: tuple[int, ...] = (0, 1, 2, 3)
    seen_digits: tuple[int, ...] = (0, 1)
    ssim_targets: tuple[float, ...] = (0.8, 1.0)
    zero_shot_levels: tuple[float, ...] = (0.0, 0.5)
    test_samples_per_cell: int = 80
    pretrain_epochs: int = 8
    probe_epochs: int = 150
    ssim_tolerance: float = 0.02
    dataset_name: str = "sklearn-digits-toy"

    def validate(self) -> None:
        if len(set(self.backbone_widths)) != len(self.backbone_widths):
            raise ValueError("backbone widths must be distinct")
        if not set(self.seen_digits) <= set(self.vocabulary_digits):
            raise ValueError("seen digits must be a subset of the vocabulary")
        if not set(self.seen_digits) < set(self.vocabulary_digits):
            raise ValueError("at least one vocabulary digit must be unseen")
        if not self.pretrain_digits:
            raise ValueError("no digit classes left for backbone pretraining")
        for level in self.ssim_targets:
            if not (0.0 < level <= 1.0):
                raise ValueError(f"ssim target {level} outside (0, 1]")
        for level in self.zero_shot_levels:
            if not (0.0 <= level <= 1.0):
                raise ValueError(f"zero-shot level {level} outside [0, 1]")
        if sorted(self.ssim_targets) != list(self.ssim_targets):
            raise ValueError("ssim targets must be sorted ascending")
        if sorted(self.zero_shot_levels) != list(self.zero_shot_levels):
            raise ValueError("zero-shot levels must be sorted ascending")

    @property
    def pretrain_digits(self) -> tuple[int, ...]:
        """Digit classes used only for backbone pretraining."""
        return tuple(d for d in range(10) if d not in self.vocabulary_digits)

    @property
    def unseen_digits(self) -> tuple[int, ...]:
        return tuple(d for d in self.vocabulary_digits if d not in self.seen_digits)

    @property
    def class_labels(self) -> tuple[str, ...]:
        return tuple(f"digit_{d}" for d in self.vocabulary_digits)


def config_from_obj(obj: Mapping) -> HarnessConfig:
    defaults = HarnessConfig()
    cfg = HarnessConfig(
        seed=int(obj.get("seed", defaults.seed)),
        backbone_widths=tuple(int(w) for w in obj.get("backbone_widths",
                                                      defaults.backbone_widths)),
        vocabulary_digits=tuple(int(d) for d in obj.get("vocabulary_digits",
                                                        defaults.vocabulary_digits)),
        seen_digits=tuple(int(d) for d in obj.get("seen_digits", defaults.seen_digits)),
        ssim_targets=tuple(float(s) for s in obj.get("ssim_targets",
                                                     defaults.ssim_targets)),
        zero_shot_levels=tuple(float(z) for z in obj.get("zero_shot_levels",
                                                         defaults.zero_shot_levels)),
        test_samples_per_cell=int(obj.get("test_samples_per_cell",
                                          defaults.test_samples_per_cell)),
        pretrain_epochs=int(obj.get("pretrain_epochs", defaults.pretrain_epochs)),
        probe_epochs=int(obj.get("probe_epochs", defaults.probe_epochs)),
        ssim_tolerance=float(obj.get("ssim_tolerance", defaults.ssim_tolerance)),
        dataset_name=str(obj.get("dataset_name", defaults.dataset_name)),
    )
    cfg.validate()
    return cfg


def load_config(path) -> HarnessConfig:
    with open(path, "r", encoding="utf-8") as fp:
        return config_from_obj(json.load(fp))
