"""Shared builders for the demo scripts."""

import random

from genmetric import GridAxes, Manifest, PredictionRecord


def demo_manifest() -> Manifest:
    return Manifest(
        class_vocabulary=("cat", "dog", "fox", "owl"),
        zero_shot_classes=("owl",),
        axes=GridAxes(
            zero_shot_levels=(0.0, 0.25),
            ssim_levels=(0.85, 1.0),
            weight_nums=(5_000_000, 20_000_000),
            model_ids={5_000_000: "tiny", 20_000_000: "small"},
        ),
        dataset_name="demo",
    )


def random_record(
    rng: random.Random, manifest: Manifest, key_tuple, sample_id: str, split: str
) -> PredictionRecord:
    vocab = manifest.class_vocabulary
    raw = [rng.random() for _ in vocab]
    # make one class dominant most of the time so cells look realistic
    if rng.random() < 0.7:
        raw[rng.randrange(len(vocab))] += 2.0
    total = sum(raw)
    zs, ssim, weight = key_tuple
    return PredictionRecord(
        sample_id=sample_id,
        true_class=vocab[rng.randrange(len(vocab))],
        split=split,
        zero_shot_pct=zs,
        ssim=ssim,
        weight_num=weight,
        probs=tuple(p / total for p in raw),
        loss=rng.uniform(0.0, 2.0),
    )
