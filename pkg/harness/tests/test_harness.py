"""Toy-sweep acceptance: emitted records must satisfy the analysis engine.

The harness is exercised through its public entry points and its outputs
are checked only through the engine's CLI (subprocess), mirroring how the
two packages interact in practice.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from probeharness import HarnessConfig, SsimUnreachable, run_harness
from probeharness.noise import cell_rng, perturb_to_ssim
import numpy as np

TOY = HarnessConfig()  # 2 backbones, 4 classes, 2 SSIM x 2 zero-shot levels


@pytest.fixture(scope="session")
def toy_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    start = time.perf_counter()
    report = run_harness(TOY, out)
    elapsed = time.perf_counter() - start
    return out, report, elapsed


def _cli(args):
    return subprocess.run(
        [sys.executable, "-m", "genmetric", *args],
        capture_output=True,
        text=True,
    )


def test_records_pass_engine_validation(toy_run):
    out, _, elapsed = toy_run
    proc = _cli(
        ["validate", "--manifest", str(out / "manifest.json"),
         "--records", str(out / "records.jsonl")]
    )
    assert proc.returncode == 0, proc.stderr
    assert "0 rejected" in proc.stdout
    assert "0 without test records" in proc.stdout
    assert elapsed < 600.0, f"toy sweep took {elapsed:.0f}s"
    print(f"ACCEPTANCE PASS: toy harness validates (exit 0, {elapsed:.1f}s)")


def test_measured_ssim_within_tolerance(toy_run):
    _, report, _ = toy_run
    for cell in report["cells"]:
        assert abs(cell["ssim_achieved"] - cell["ssim_target"]) <= TOY.ssim_tolerance
    print("ACCEPTANCE PASS: measured mean SSIM within 0.02 of every target")


def test_ssim_one_means_untouched_images(toy_run):
    _, report, _ = toy_run
    for cell in report["cells"]:
        if cell["ssim_target"] == 1.0:
            assert cell["ssim_achieved"] == 1.0
            assert cell["noise_amplitude"] == 0.0


def test_zero_shot_composition(toy_run):
    out, report, _ = toy_run
    unseen_labels = {f"digit_{d}" for d in TOY.unseen_digits}
    per_cell: dict[tuple, list] = {}
    for line in (out / "records.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if rec["split"] != "test":
            continue
        key = (rec["weight_num"], rec["zero_shot_pct"], rec["ssim"])
        per_cell.setdefault(key, []).append(rec["true_class"])
    for (weight, zs, ssim), classes in per_cell.items():
        unseen = sum(c in unseen_labels for c in classes)
        if zs == 0.0:
            assert unseen == 0  # only seen classes without zero-shot mixing
        else:
            assert abs(unseen - zs * len(classes)) <= 1.0
    # report agrees with the records
    for cell in report["cells"]:
        key = (cell["weight_num"], cell["zero_shot_pct"], cell["ssim_target"])
        unseen = sum(c in unseen_labels for c in per_cell[key])
        assert unseen == cell["n_unseen"]


def test_train_records_cover_every_cell(toy_run):
    out, _, _ = toy_run
    cells_with_train = set()
    for line in (out / "records.jsonl").read_text().splitlines():
        rec = json.loads(line)
        if rec["split"] == "train":
            cells_with_train.add(
                (rec["weight_num"], rec["zero_shot_pct"], rec["ssim"])
            )
    n_cells = (
        len(TOY.backbone_widths)
        * len(TOY.zero_shot_levels)
        * len(TOY.ssim_targets)
    )
    assert len(cells_with_train) == n_cells


def test_fixed_seed_run_is_reproducible(tmp_path):
    cfg = HarnessConfig(
        ssim_targets=(1.0,),  # no-noise identity case
        zero_shot_levels=(0.0, 0.5),
        backbone_widths=(6,),
        test_samples_per_cell=40,
        pretrain_epochs=2,
        probe_epochs=40,
    )
    run_harness(cfg, tmp_path / "a")
    run_harness(cfg, tmp_path / "b")
    for name in ("records.jsonl", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_dry_run_emits_manifest_only(tmp_path):
    report = run_harness(TOY, tmp_path, dry_run=True)
    assert report["dry_run"] is True
    assert (tmp_path / "manifest.json").exists()
    assert not (tmp_path / "records.jsonl").exists()


def test_analysis_pipeline_consumes_harness_output(toy_run, tmp_path):
    out, _, _ = toy_run
    proc = _cli(
        ["analyze", "--manifest", str(out / "manifest.json"),
         "--records", str(out / "records.jsonl"), "--out", str(tmp_path)]
    )
    assert proc.returncode == 0, proc.stderr
    point = json.loads((tmp_path / "tradeoff.json").read_text())
    assert point["weight_num"] in (720, 2736)


def test_ssim_bisection_raises_when_unreachable():
    rng = cell_rng(0, "unreachable")
    flat = np.full((4, 8, 8), 0.5)  # constant images: noise cannot be scaled
    with pytest.raises(SsimUnreachable):
        perturb_to_ssim(flat, 1e-6, rng)


def test_config_validation():
    with pytest.raises(ValueError):
        HarnessConfig(seen_digits=(0, 1, 2, 3)).validate()  # nothing unseen
    with pytest.raises(ValueError):
        HarnessConfig(backbone_widths=(6, 6)).validate()
    with pytest.raises(ValueError):
        HarnessConfig(ssim_targets=(1.0, 0.8)).validate()
    with pytest.raises(ValueError):
        HarnessConfig(ssim_targets=(0.0, 1.0)).validate()  # 0 is outside (0, 1]
    with pytest.raises(ValueError):
        HarnessConfig(vocabulary_digits=tuple(range(10))).validate()
