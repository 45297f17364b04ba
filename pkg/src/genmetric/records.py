"""Schema types and validation for sweep prediction records.

A manifest fixes the class vocabulary, the sweep grid (zero-shot fraction
x SSIM level x model weight count) and the thresholds used by the
conflict-counting rules. Each prediction record carries one sample's
probability vector, aligned to the vocabulary, under one grid condition.
All types are immutable after construction and safe to share across
threads; validation is a pure function of (record, manifest).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import NoSliceWarning, UnknownFieldWarning, ValidationError

PROB_SUM_TOL = 1e-6
SPLITS = ("train", "test")

RECORD_FIELDS = (
    "sample_id",
    "true_class",
    "split",
    "zero_shot_pct",
    "ssim",
    "weight_num",
    "probs",
    "loss",
)
_REQUIRED_FIELDS = RECORD_FIELDS[:-1]  # loss is optional


@dataclass(frozen=True)
class KappaThresholds:
    """Decision thresholds for the per-record conflict rules.

    tau_high splits conflicts into high vs low confidence, tau_fail marks
    failed samples by max probability, delta_tie is the additive margin
    that defines the near-tie set, and epsilon_denominator guards the
    chance-agreement denominator. loss_fail, when set, additionally marks
    a sample failed if its loss exceeds it (disabled by default).
    """

    tau_high: float = 0.5
    tau_fail: float = 0.1
    delta_tie: float = 0.05
    epsilon_denominator: float = 1e-9
    loss_fail: float | None = None


@dataclass(frozen=True)
class GridAxes:
    """The three sweep axes: zero-shot fraction, SSIM level, weight count."""

    zero_shot_levels: tuple[float, ...]
    ssim_levels: tuple[float, ...]
    weight_nums: tuple[int, ...]
    model_ids: Mapping[int, str] = field(default_factory=dict)


@dataclass(frozen=True, order=True)
class CellKey:
    """Coordinates of one cell: (zero-shot %, SSIM, weight count)."""

    zero_shot_pct: float
    ssim: float
    weight_num: int


@dataclass(frozen=True)
class Manifest:
    class_vocabulary: tuple[str, ...]
    zero_shot_classes: tuple[str, ...]
    axes: GridAxes
    thresholds: KappaThresholds = KappaThresholds()
    dataset_name: str = ""
    notes: str = ""


@dataclass(frozen=True)
class PredictionRecord:
    """One sample's evaluation outcome under one sweep condition."""

    sample_id: str
    true_class: str
    split: str
    zero_shot_pct: float
    ssim: float
    weight_num: int
    probs: tuple[float, ...]
    loss: float | None = None

    @property
    def cell_key(self) -> CellKey:
        return CellKey(self.zero_shot_pct, self.ssim, self.weight_num)


def _check_axis(name: str, values: tuple, lo: float, hi: float,
                lo_open: bool = False) -> None:
    if len(values) == 0:
        raise ValidationError("EmptyAxis", f"{name} has no levels", field=name)
    for prev, cur in zip(values, values[1:]):
        if cur <= prev:
            raise ValidationError(
                "UnsortedAxis",
                f"{name} must be strictly increasing, got {prev!r} then {cur!r}",
                field=name,
            )
    for v in values:
        below = v <= lo if lo_open else v < lo
        if below or v > hi:
            raise ValidationError(
                "AxisOutOfRange", f"{name} value {v!r} outside the valid range",
                field=name,
            )


def validate_manifest(manifest: Manifest) -> None:
    """Raise ValidationError on the first violated manifest invariant.

    Emits NoSliceWarning (non-fatal) when neither SSIM=1 nor zero-shot=0
    is on the axes, since then no 2D consistency slice can be extracted.
    """
    vocab = manifest.class_vocabulary
    if len(vocab) < 2:
        raise ValidationError(
            "BadVocabulary", "class_vocabulary needs at least 2 entries",
            field="class_vocabulary",
        )
    seen: set[str] = set()
    for c in vocab:
        if c in seen:
            raise ValidationError(
                "DuplicateClass", f"class {c!r} appears twice",
                field="class_vocabulary",
            )
        seen.add(c)
    for c in manifest.zero_shot_classes:
        if c not in seen:
            raise ValidationError(
                "ZeroShotNotSubset",
                f"zero-shot class {c!r} is not in the vocabulary",
                field="zero_shot_classes",
            )

    axes = manifest.axes
    _check_axis("zero_shot_levels", axes.zero_shot_levels, 0.0, 1.0)
    _check_axis("ssim_levels", axes.ssim_levels, 0.0, 1.0, lo_open=True)
    _check_axis("weight_nums", axes.weight_nums, 1, float("inf"))
    for w in axes.weight_nums:
        if not isinstance(w, int):
            raise ValidationError(
                "AxisOutOfRange", f"weight_num {w!r} is not an integer",
                field="weight_nums",
            )

    th = manifest.thresholds
    for name in ("tau_high", "tau_fail", "delta_tie"):
        v = getattr(th, name)
        if not (0.0 < v < 1.0):
            raise ValidationError(
                "BadThreshold", f"{name} must lie in (0, 1), got {v!r}", field=name
            )
    if th.epsilon_denominator <= 0.0:
        raise ValidationError(
            "BadThreshold", "epsilon_denominator must be positive",
            field="epsilon_denominator",
        )
    if not th.tau_fail < th.tau_high:
        raise ValidationError(
            "BadThreshold", "tau_fail must be below tau_high", field="tau_fail"
        )
    if not th.delta_tie < th.tau_high:
        raise ValidationError(
            "BadThreshold", "delta_tie must be below tau_high", field="delta_tie"
        )
    if th.loss_fail is not None and th.loss_fail <= 0.0:
        raise ValidationError(
            "BadThreshold", "loss_fail must be positive when set", field="loss_fail"
        )

    if 1.0 not in axes.ssim_levels and 0.0 not in axes.zero_shot_levels:
        warnings.warn(
            "neither SSIM=1 nor zero-shot=0 is on the axes; "
            "no consistency slice will be available",
            NoSliceWarning,
            stacklevel=2,
        )


def validate_record(record: PredictionRecord, manifest: Manifest) -> None:
    """Raise ValidationError identifying the first violated record invariant.

    Checks run in invariant order: probability vector shape and
    normalization, grid membership, class membership, split, loss sign.
    Deterministic: the same record always fails (or passes) identically.
    """
    probs = record.probs
    n = len(manifest.class_vocabulary)
    if len(probs) != n:
        raise ValidationError(
            "ProbLength",
            f"probs has {len(probs)} entries, vocabulary has {n}",
            field="probs",
        )
    for p in probs:
        if not (0.0 <= p <= 1.0):
            raise ValidationError(
                "ProbRange", f"probability {p!r} outside [0, 1]", field="probs"
            )
    total = sum(probs)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValidationError(
            "ProbSumError",
            f"probs sum to {total!r}, deviating from 1 by more than {PROB_SUM_TOL}",
            field="probs",
        )
    axes = manifest.axes
    if record.zero_shot_pct not in axes.zero_shot_levels:
        raise ValidationError(
            "OffGridCoordinate",
            f"zero_shot_pct {record.zero_shot_pct!r} is not an axis level",
            field="zero_shot_pct",
        )
    if record.ssim not in axes.ssim_levels:
        raise ValidationError(
            "OffGridCoordinate",
            f"ssim {record.ssim!r} is not an axis level",
            field="ssim",
        )
    if record.weight_num not in axes.weight_nums:
        raise ValidationError(
            "OffGridCoordinate",
            f"weight_num {record.weight_num!r} is not an axis level",
            field="weight_num",
        )
    if record.true_class not in manifest.class_vocabulary:
        raise ValidationError(
            "UnknownClass",
            f"true_class {record.true_class!r} is not in the vocabulary",
            field="true_class",
        )
    if record.split not in SPLITS:
        raise ValidationError(
            "BadSplit", f"split must be one of {SPLITS}, got {record.split!r}",
            field="split",
        )
    if record.loss is not None and record.loss < 0.0:
        raise ValidationError(
            "BadLoss", f"loss must be non-negative, got {record.loss!r}",
            field="loss",
        )


# ---------------------------------------------------------------------------
# Wire formats: records as JSON objects / CSV rows, manifest as JSON.


def parse_record_obj(obj: Mapping[str, Any], strict: bool = False) -> PredictionRecord:
    """Build a PredictionRecord from a decoded JSON object.

    Unknown fields are rejected in strict mode and ignored with a warning
    otherwise. Raises ValidationError with kinds MissingField /
    BadFieldType / UnknownField.
    """
    unknown = [k for k in obj if k not in RECORD_FIELDS]
    if unknown:
        if strict:
            raise ValidationError(
                "UnknownField", f"unknown fields {unknown}", field=unknown[0]
            )
        warnings.warn(
            f"ignoring unknown record fields {unknown}",
            UnknownFieldWarning,
            stacklevel=2,
        )
    for k in _REQUIRED_FIELDS:
        if k not in obj:
            raise ValidationError("MissingField", f"missing field {k!r}", field=k)
    try:
        probs = tuple(float(p) for p in obj["probs"])
        loss = obj.get("loss")
        weight = obj["weight_num"]
        if isinstance(weight, float) and not weight.is_integer():
            raise ValidationError(
                "BadFieldType", f"weight_num {weight!r} is not an integer",
                field="weight_num",
            )
        return PredictionRecord(
            sample_id=str(obj["sample_id"]),
            true_class=str(obj["true_class"]),
            split=str(obj["split"]),
            zero_shot_pct=float(obj["zero_shot_pct"]),
            ssim=float(obj["ssim"]),
            weight_num=int(weight),
            probs=probs,
            loss=None if loss is None else float(loss),
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError("BadFieldType", str(exc)) from exc


def parse_record_line(line: str, strict: bool = False) -> PredictionRecord:
    """Parse one JSONL record line."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValidationError("MalformedLine", f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("MalformedLine", "record line is not a JSON object")
    return parse_record_obj(obj, strict=strict)


def parse_record_csv_row(row: Mapping[str, str], strict: bool = False) -> PredictionRecord:
    """Parse one CSV row; probs arrive as semicolon-separated decimals."""
    obj: dict[str, Any] = dict(row)
    if "probs" not in obj or obj["probs"] is None:
        raise ValidationError("MissingField", "missing field 'probs'", field="probs")
    try:
        obj["probs"] = [float(p) for p in str(obj["probs"]).split(";") if p != ""]
    except ValueError as exc:
        raise ValidationError("BadFieldType", f"bad probs column: {exc}") from exc
    if obj.get("loss", "") in ("", None):
        obj.pop("loss", None)
    obj = {k: v for k, v in obj.items() if v is not None}
    return parse_record_obj(obj, strict=strict)


def record_to_obj(record: PredictionRecord) -> dict[str, Any]:
    obj: dict[str, Any] = {
        "sample_id": record.sample_id,
        "true_class": record.true_class,
        "split": record.split,
        "zero_shot_pct": record.zero_shot_pct,
        "ssim": record.ssim,
        "weight_num": record.weight_num,
        "probs": list(record.probs),
    }
    if record.loss is not None:
        obj["loss"] = record.loss
    return obj


def record_to_json_line(record: PredictionRecord) -> str:
    """Serialize one record as a compact JSON line (deterministic)."""
    return json.dumps(record_to_obj(record), separators=(",", ":"))


def write_records_jsonl(records: Iterable[PredictionRecord], fp) -> int:
    n = 0
    for rec in records:
        fp.write(record_to_json_line(rec))
        fp.write("\n")
        n += 1
    return n


def manifest_to_obj(manifest: Manifest) -> dict[str, Any]:
    th = manifest.thresholds
    return {
        "dataset_name": manifest.dataset_name,
        "notes": manifest.notes,
        "class_vocabulary": list(manifest.class_vocabulary),
        "zero_shot_classes": list(manifest.zero_shot_classes),
        "axes": {
            "zero_shot_levels": list(manifest.axes.zero_shot_levels),
            "ssim_levels": list(manifest.axes.ssim_levels),
            "weight_nums": list(manifest.axes.weight_nums),
            "model_ids": {str(k): v for k, v in sorted(manifest.axes.model_ids.items())},
        },
        "thresholds": {
            "tau_high": th.tau_high,
            "tau_fail": th.tau_fail,
            "delta_tie": th.delta_tie,
            "epsilon_denominator": th.epsilon_denominator,
            "loss_fail": th.loss_fail,
        },
    }


def manifest_to_json(manifest: Manifest) -> str:
    return json.dumps(manifest_to_obj(manifest), indent=2) + "\n"


def manifest_from_obj(obj: Mapping[str, Any]) -> Manifest:
    try:
        axes_obj = obj["axes"]
        axes = GridAxes(
            zero_shot_levels=tuple(float(v) for v in axes_obj["zero_shot_levels"]),
            ssim_levels=tuple(float(v) for v in axes_obj["ssim_levels"]),
            weight_nums=tuple(int(v) for v in axes_obj["weight_nums"]),
            model_ids={int(k): str(v) for k, v in axes_obj.get("model_ids", {}).items()},
        )
        th_obj = obj.get("thresholds", {})
        defaults = KappaThresholds()
        loss_fail = th_obj.get("loss_fail")
        thresholds = KappaThresholds(
            tau_high=float(th_obj.get("tau_high", defaults.tau_high)),
            tau_fail=float(th_obj.get("tau_fail", defaults.tau_fail)),
            delta_tie=float(th_obj.get("delta_tie", defaults.delta_tie)),
            epsilon_denominator=float(
                th_obj.get("epsilon_denominator", defaults.epsilon_denominator)
            ),
            loss_fail=None if loss_fail is None else float(loss_fail),
        )
        return Manifest(
            class_vocabulary=tuple(str(c) for c in obj["class_vocabulary"]),
            zero_shot_classes=tuple(str(c) for c in obj.get("zero_shot_classes", [])),
            axes=axes,
            thresholds=thresholds,
            dataset_name=str(obj.get("dataset_name", "")),
            notes=str(obj.get("notes", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError("MalformedManifest", str(exc)) from exc


def load_manifest(path) -> Manifest:
    """Read, parse and validate a manifest JSON document."""
    with open(path, "r", encoding="utf-8") as fp:
        try:
            obj = json.load(fp)
        except json.JSONDecodeError as exc:
            raise ValidationError("MalformedManifest", f"invalid JSON: {exc}") from exc
    manifest = manifest_from_obj(obj)
    validate_manifest(manifest)
    return manifest
