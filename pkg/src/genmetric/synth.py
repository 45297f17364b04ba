"""Deterministic synthetic record generation with planted structure.

Streams are reproducible down to the byte: randomness comes from numpy's
Philox counter-based generator, keyed per (seed, cell, split) through
SHA-256, so the stream for one cell never depends on how many records
another cell emitted. Class counts (errors, conflicts) are assigned by
quota rather than by coin flips, which pins per-cell empirical rates to
the profile targets up to rounding; the random stream only jitters
probability magnitudes inside windows that cannot change how a record is
classified.

Probability vectors put a target mass on the true class (or on the tie
pair for conflict samples) and spread the remainder uniformly over the
other classes.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .classmetrics import assign_rule
from .errors import InfeasiblePlantError
from .gridstats import build_grid
from .ingest import _Accumulator
from .records import (
    CellKey,
    GridAxes,
    KappaThresholds,
    Manifest,
    PredictionRecord,
    validate_manifest,
)
from .tradeoff import TradeOffConfig, find_tradeoff

_TH = KappaThresholds()  # synthetic manifests always carry the default thresholds


@dataclass(frozen=True)
class ErrorProfile:
    """Monotone error-rate trends over the three sweep dimensions.

    target(cell, class) = base_error
                          + ssim_slope * (1 - ssim)
                          + zero_shot_slope * zero_shot_pct
                          + log_weight_slope * ln(weight / min_weight)
                          + a fixed per-class offset spread over class_spread
    clamped to [0, 1]. train_error is a constant train-side target
    (defaults to base_error).
    """

    base_error: float = 0.1
    ssim_slope: float = 0.0
    zero_shot_slope: float = 0.0
    log_weight_slope: float = 0.0
    class_spread: float = 0.0
    train_error: float | None = None


@dataclass(frozen=True)
class ConflictProfile:
    """Fraction of test samples emitted as near-ties, split high/low."""

    fraction: float = 0.0
    high_fraction: float = 0.5


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    axes: GridAxes
    n_classes: int
    samples_per_class_per_cell: int
    error_profile: ErrorProfile = ErrorProfile()
    conflict_profile: ConflictProfile = ConflictProfile()
    planted_tradeoff: CellKey | None = None
    plant_dip: float = 0.15
    train_samples_per_class_per_cell: int | None = None
    dataset_name: str = "synthetic"


def validate_spec(spec: SynthSpec) -> None:
    if spec.n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    if spec.samples_per_class_per_cell < 1:
        raise ValueError("samples_per_class_per_cell must be positive")
    prof, conf = spec.error_profile, spec.conflict_profile
    for name in ("base_error", "class_spread"):
        v = getattr(prof, name)
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
    if not (0.0 <= conf.fraction <= 1.0 and 0.0 <= conf.high_fraction <= 1.0):
        raise ValueError("conflict fractions must lie in [0, 1]")
    if conf.fraction > 0.0 and conf.high_fraction < 1.0 and spec.n_classes < 3:
        # Two probabilities summing to 1 and within delta_tie of each other
        # force max >= 0.5 = tau_high, so a low-confidence tie cannot exist.
        raise ValueError("low-confidence conflicts require at least 3 classes")
    if spec.planted_tradeoff is not None:
        key = spec.planted_tradeoff
        axes = spec.axes
        if (
            key.zero_shot_pct not in axes.zero_shot_levels
            or key.ssim not in axes.ssim_levels
            or key.weight_num not in axes.weight_nums
        ):
            raise ValueError(f"planted_tradeoff {key} is off-grid")


def _class_labels(n: int) -> tuple[str, ...]:
    return tuple(f"class_{i:02d}" for i in range(n))


def _cell_rng(seed: int, key: CellKey, split: str) -> np.random.Generator:
    tag = f"{seed}/{key.zero_shot_pct!r}/{key.ssim!r}/{key.weight_num}/{split}"
    digest = hashlib.sha256(tag.encode("utf-8")).digest()[:16]
    philox_key = np.frombuffer(digest, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=philox_key))


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _trend(spec: SynthSpec, key: CellKey) -> float:
    prof = spec.error_profile
    z_min = min(spec.axes.weight_nums)
    return (
        prof.base_error
        + prof.ssim_slope * (1.0 - key.ssim)
        + prof.zero_shot_slope * key.zero_shot_pct
        + prof.log_weight_slope * math.log(key.weight_num / z_min)
    )


def _target_error(
    spec: SynthSpec, key: CellKey, class_index: int, trend_floor: float
) -> float:
    # The planted cell's targets sit plant_dip below the best cell's trend,
    # wherever on the grid the planted cell lies; everything else follows
    # the profile. Class offsets are cell-independent so they never change
    # the cell ranking.
    if spec.planted_tradeoff is not None and key == spec.planted_tradeoff:
        t = trend_floor - spec.plant_dip
    else:
        t = _trend(spec, key)
    prof = spec.error_profile
    if spec.n_classes > 1 and prof.class_spread > 0.0:
        t += prof.class_spread * (class_index / (spec.n_classes - 1) - 0.5)
    return min(1.0, max(0.0, t))


def _spread_remainder(probs: list[float], skip: tuple[int, ...], remainder: float) -> None:
    others = [j for j in range(len(probs)) if j not in skip]
    share = remainder / len(others) if others else 0.0
    for j in others:
        probs[j] = share


def _decisive_vector(n: int, target: int, u: float) -> list[float]:
    top = 0.75 + 0.15 * u
    probs = [0.0] * n
    probs[target] = top
    _spread_remainder(probs, (target,), 1.0 - top)
    return probs


def _conflict_vector(
    n: int, true_index: int, partner: int, high: bool, u: float
) -> list[float]:
    if high:
        if n == 2:
            m = _TH.tau_high + 0.1 * _TH.delta_tie + 0.2 * _TH.delta_tie * u
            return [m, 1.0 - m] if true_index == 0 else [1.0 - m, m]
        m = _TH.tau_high + 0.1 * _TH.delta_tie + 0.2 * _TH.delta_tie * u
    else:
        m = 0.8 * _TH.tau_high + 0.04 * u  # in [0.40, 0.44) under defaults
    second = m - _TH.delta_tie * (0.5 + 0.2 * u)
    probs = [0.0] * n
    probs[true_index] = m
    probs[partner] = second
    _spread_remainder(probs, (true_index, partner), 1.0 - m - second)
    return probs


def _pick_partner(rng: np.random.Generator, n: int, true_index: int) -> int:
    j = int(rng.integers(0, n - 1))
    return j if j < true_index else j + 1


def _emit_class_records(
    spec: SynthSpec,
    key: CellKey,
    split: str,
    class_index: int,
    labels: tuple[str, ...],
    n_samples: int,
    target: float,
    with_conflicts: bool,
    rng: np.random.Generator,
) -> list[PredictionRecord]:
    n_cls = spec.n_classes
    conf = spec.conflict_profile
    n_conf = _round_half_up(conf.fraction * n_samples) if with_conflicts else 0
    n_high = _round_half_up(conf.high_fraction * n_conf)
    n_low = n_conf - n_high
    n_err = _round_half_up(target * n_samples)
    if n_err + n_conf > n_samples:
        raise InfeasiblePlantError(
            f"cell {key}, class {labels[class_index]}: error target {target:.3f} "
            f"plus conflict fraction {conf.fraction:.3f} exceed 1"
        )
    kinds = (
        ["err"] * n_err
        + ["high"] * n_high
        + ["low"] * n_low
        + ["ok"] * (n_samples - n_err - n_conf)
    )
    records = []
    for k, kind in enumerate(kinds):
        u = float(rng.random())
        if kind == "ok":
            probs = _decisive_vector(n_cls, class_index, u)
            expect = ("b", "iv")
        elif kind == "err":
            wrong = _pick_partner(rng, n_cls, class_index)
            probs = _decisive_vector(n_cls, wrong, u)
            expect = ("c", "v")
        else:
            partner = _pick_partner(rng, n_cls, class_index)
            probs = _conflict_vector(n_cls, class_index, partner, kind == "high", u)
            expect = ("a", "ii") if kind == "high" else ("d", "iii")
        got = assign_rule(probs, None, class_index, _TH)
        if got != expect:  # guards the construction windows
            raise AssertionError(
                f"synthetic vector misclassified: kind={kind} got={got} probs={probs}"
            )
        loss = -math.log(probs[class_index]) if probs[class_index] > 0 else 50.0
        records.append(
            PredictionRecord(
                sample_id=f"{split[:2]}-c{class_index:02d}-{k:05d}",
                true_class=labels[class_index],
                split=split,
                zero_shot_pct=key.zero_shot_pct,
                ssim=key.ssim,
                weight_num=key.weight_num,
                probs=tuple(probs),
                loss=loss,
            )
        )
    return records


def generate(spec: SynthSpec) -> tuple[list[PredictionRecord], Manifest]:
    """Materialize the synthetic sweep; deterministic for a given spec.

    When a trade-off cell is planted, the generated dataset is run through
    the actual grid/objective pipeline and generation fails with
    InfeasiblePlantError unless that cell is the unique objective minimum.
    """
    validate_spec(spec)
    labels = _class_labels(spec.n_classes)
    manifest = Manifest(
        class_vocabulary=labels,
        zero_shot_classes=(),
        axes=spec.axes,
        thresholds=_TH,
        dataset_name=spec.dataset_name,
        notes="synthetic sweep",
    )
    validate_manifest(manifest)

    n_train = (
        spec.samples_per_class_per_cell
        if spec.train_samples_per_class_per_cell is None
        else spec.train_samples_per_class_per_cell
    )
    train_target = (
        spec.error_profile.train_error
        if spec.error_profile.train_error is not None
        else spec.error_profile.base_error
    )

    records: list[PredictionRecord] = []
    keys = [
        CellKey(x, y, z)
        for x in spec.axes.zero_shot_levels
        for y in spec.axes.ssim_levels
        for z in spec.axes.weight_nums
    ]
    trend_floor = min(_trend(spec, key) for key in keys)
    for key in sorted(keys):
        test_rng = _cell_rng(spec.seed, key, "test")
        cell_records: list[PredictionRecord] = []
        for ci in range(spec.n_classes):
            cell_records.extend(
                _emit_class_records(
                    spec, key, "test", ci, labels,
                    spec.samples_per_class_per_cell,
                    _target_error(spec, key, ci, trend_floor),
                    with_conflicts=True,
                    rng=test_rng,
                )
            )
        order = test_rng.permutation(len(cell_records))
        records.extend(cell_records[i] for i in order)

        if n_train > 0:
            train_rng = _cell_rng(spec.seed, key, "train")
            for ci in range(spec.n_classes):
                records.extend(
                    _emit_class_records(
                        spec, key, "train", ci, labels, n_train,
                        min(1.0, max(0.0, train_target)),
                        with_conflicts=False,
                        rng=train_rng,
                    )
                )

    if spec.planted_tradeoff is not None:
        _verify_plant(spec, records, manifest)
    return records, manifest


def _verify_plant(spec, records, manifest) -> None:
    acc = _Accumulator()
    for rec in records:
        acc.add(rec)
    grid = build_grid(acc.freeze(), manifest)
    point = find_tradeoff(grid, TradeOffConfig())
    if point.key != spec.planted_tradeoff or point.tie_set_size != 1:
        raise InfeasiblePlantError(
            f"planted cell {spec.planted_tradeoff} is not the unique optimum "
            f"(winner {point.key}, tie set {point.tie_set_size}); "
            "increase plant_dip or the profile contrast"
        )


# ---------------------------------------------------------------------------
# Spec wire format.


def spec_from_obj(obj: Mapping[str, Any]) -> SynthSpec:
    axes_obj = obj["axes"]
    axes = GridAxes(
        zero_shot_levels=tuple(float(v) for v in axes_obj["zero_shot_levels"]),
        ssim_levels=tuple(float(v) for v in axes_obj["ssim_levels"]),
        weight_nums=tuple(int(v) for v in axes_obj["weight_nums"]),
        model_ids={int(k): str(v) for k, v in axes_obj.get("model_ids", {}).items()},
    )
    prof_obj = obj.get("error_profile", {})
    prof = ErrorProfile(
        base_error=float(prof_obj.get("base_error", 0.1)),
        ssim_slope=float(prof_obj.get("ssim_slope", 0.0)),
        zero_shot_slope=float(prof_obj.get("zero_shot_slope", 0.0)),
        log_weight_slope=float(prof_obj.get("log_weight_slope", 0.0)),
        class_spread=float(prof_obj.get("class_spread", 0.0)),
        train_error=(
            None
            if prof_obj.get("train_error") is None
            else float(prof_obj["train_error"])
        ),
    )
    conf_obj = obj.get("conflict_profile", {})
    conf = ConflictProfile(
        fraction=float(conf_obj.get("fraction", 0.0)),
        high_fraction=float(conf_obj.get("high_fraction", 0.5)),
    )
    planted = obj.get("planted_tradeoff")
    planted_key = (
        None
        if planted is None
        else CellKey(
            float(planted["zero_shot_pct"]),
            float(planted["ssim"]),
            int(planted["weight_num"]),
        )
    )
    train_n = obj.get("train_samples_per_class_per_cell")
    spec = SynthSpec(
        seed=int(obj["seed"]),
        axes=axes,
        n_classes=int(obj["n_classes"]),
        samples_per_class_per_cell=int(obj["samples_per_class_per_cell"]),
        error_profile=prof,
        conflict_profile=conf,
        planted_tradeoff=planted_key,
        plant_dip=float(obj.get("plant_dip", 0.15)),
        train_samples_per_class_per_cell=None if train_n is None else int(train_n),
        dataset_name=str(obj.get("dataset_name", "synthetic")),
    )
    validate_spec(spec)
    return spec


def load_spec(path) -> SynthSpec:
    with open(path, "r", encoding="utf-8") as fp:
        return spec_from_obj(json.load(fp))
