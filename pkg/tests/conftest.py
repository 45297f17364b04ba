import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from genmetric import GridAxes, Manifest, PredictionRecord


def make_axes(zs=(0.0, 0.5), ssim=(0.8, 1.0), weights=(5, 10)) -> GridAxes:
    return GridAxes(
        zero_shot_levels=tuple(zs),
        ssim_levels=tuple(ssim),
        weight_nums=tuple(weights),
    )


def make_manifest(vocab=("A", "B"), zero_shot=("B",), axes=None, **kw) -> Manifest:
    return Manifest(
        class_vocabulary=tuple(vocab),
        zero_shot_classes=tuple(zero_shot),
        axes=axes or make_axes(),
        **kw,
    )


def make_record(
    probs,
    true_class="A",
    split="test",
    zs=0.0,
    ssim=1.0,
    weight=5,
    sample_id="s1",
    loss=None,
) -> PredictionRecord:
    return PredictionRecord(
        sample_id=sample_id,
        true_class=true_class,
        split=split,
        zero_shot_pct=zs,
        ssim=ssim,
        weight_num=weight,
        probs=tuple(probs),
        loss=loss,
    )


@pytest.fixture
def manifest() -> Manifest:
    return make_manifest()
