"""Sweep orchestration: pretrain, probe, perturb, evaluate, emit records.

Emits exactly the record JSONL and manifest JSON formats the analysis
engine ingests (fields sample_id, true_class, split, zero_shot_pct, ssim,
weight_num, probs, loss; manifest with class_vocabulary,
zero_shot_classes, axes, dataset_name). The harness talks to the engine
only through those files, never through its internals.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import torch

from .config import HarnessConfig
from .data import assemble_cell_indices, build_pools
from .model import (
    extract_features,
    parameter_count,
    predict_probs,
    pretrain_backbone,
    train_probe,
)
from .noise import cell_rng, perturb_to_ssim


def _record_line(
    sample_id: str, label: str, label_index: int, split: str,
    zs: float, ssim: float, weight: int, probs: np.ndarray,
) -> str:
    loss = -math.log(max(float(probs[label_index]), 1e-300))
    obj = {
        "sample_id": sample_id,
        "true_class": label,
        "split": split,
        "zero_shot_pct": zs,
        "ssim": ssim,
        "weight_num": weight,
        "probs": [float(p) for p in probs],
        "loss": loss,
    }
    return json.dumps(obj, separators=(",", ":"))


def build_manifest(cfg: HarnessConfig, weight_counts: dict[int, int]) -> dict:
    model_ids = {str(weight_counts[w]): f"tinyconv-w{w}" for w in cfg.backbone_widths}
    return {
        "dataset_name": cfg.dataset_name,
        "notes": "toy linear-probe sweep over frozen tiny backbones",
        "class_vocabulary": list(cfg.class_labels),
        "zero_shot_classes": [f"digit_{d}" for d in cfg.unseen_digits],
        "axes": {
            "zero_shot_levels": list(cfg.zero_shot_levels),
            "ssim_levels": list(cfg.ssim_targets),
            "weight_nums": sorted(weight_counts.values()),
            "model_ids": model_ids,
        },
    }


def run_harness(cfg: HarnessConfig, out_dir: str | Path, dry_run: bool = False) -> dict:
    """Execute the sweep; returns the achieved-SSIM report.

    Writes records.jsonl, manifest.json and harness_report.json into
    out_dir (manifest only under dry_run).
    """
    cfg.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.use_deterministic_algorithms(True)

    pools = build_pools(
        cfg.vocabulary_digits, cfg.seen_digits, cfg.pretrain_digits, cfg.seed
    )
    class_index = {d: i for i, d in enumerate(cfg.vocabulary_digits)}

    backbones = {}
    weight_counts: dict[int, int] = {}
    for width in cfg.backbone_widths:
        backbones[width] = pretrain_backbone(
            width,
            pools.pretrain_images,
            pools.pretrain_labels,
            n_classes=len(cfg.pretrain_digits),
            epochs=cfg.pretrain_epochs,
            seed=cfg.seed + width,
        )
        weight_counts[width] = parameter_count(backbones[width])
    if len(set(weight_counts.values())) != len(weight_counts):
        raise ValueError(f"backbone parameter counts collide: {weight_counts}")

    manifest = build_manifest(cfg, weight_counts)
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if dry_run:
        return {"dry_run": True, "weight_counts": weight_counts}

    report: dict = {"weight_counts": weight_counts, "cells": []}
    lines: list[str] = []
    for width in cfg.backbone_widths:
        backbone = backbones[width]
        weight = weight_counts[width]

        train_features = extract_features(backbone, pools.train_images)
        train_classes = np.array([class_index[d] for d in pools.train_digits])
        probe = train_probe(
            train_features, train_classes, len(cfg.class_labels),
            epochs=cfg.probe_epochs, seed=cfg.seed + 101 * width,
        )
        # Train-side evaluations are clean; replicated per cell so every
        # cell carries the train error its gap needs.
        train_probs = predict_probs(backbone, probe, pools.train_images)

        for zs in cfg.zero_shot_levels:
            for ssim_target in cfg.ssim_targets:
                rng = cell_rng(cfg.seed, f"w{width}/zs{zs!r}/ssim{ssim_target!r}")
                idx = assemble_cell_indices(
                    pools, cfg.seen_digits, cfg.unseen_digits, zs,
                    cfg.test_samples_per_cell, rng,
                )
                noisy, achieved, amplitude = perturb_to_ssim(
                    pools.test_images[idx], ssim_target, rng
                )
                probs = predict_probs(backbone, probe, noisy)
                for row, pool_i in enumerate(idx):
                    digit = int(pools.test_digits[pool_i])
                    lines.append(
                        _record_line(
                            f"d{pools.test_pool_ids[pool_i]}", f"digit_{digit}",
                            class_index[digit], "test",
                            zs, ssim_target, weight, probs[row],
                        )
                    )
                for row, digit in enumerate(pools.train_digits):
                    digit = int(digit)
                    lines.append(
                        _record_line(
                            f"t{row}", f"digit_{digit}", class_index[digit],
                            "train", zs, ssim_target, weight, train_probs[row],
                        )
                    )
                report["cells"].append(
                    {
                        "weight_num": weight,
                        "zero_shot_pct": zs,
                        "ssim_target": ssim_target,
                        "ssim_achieved": achieved,
                        "noise_amplitude": amplitude,
                        "n_test": int(len(idx)),
                        "n_unseen": int(
                            np.isin(pools.test_digits[idx], cfg.unseen_digits).sum()
                        ),
                    }
                )

    (out_dir / "records.jsonl").write_text("\n".join(lines) + "\n")
    (out_dir / "harness_report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n"
    )
    return report
