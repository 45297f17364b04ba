import random
from collections import Counter

import pytest

from genmetric import (
    CellKey,
    DuplicateSampleWarning,
    IngestAbort,
    coverage_report,
    ingest_files,
    ingest_stream,
    record_to_json_line,
)

from conftest import make_axes, make_manifest, make_record


def lines_for(records):
    return [record_to_json_line(r) for r in records]


def test_single_cell_grouping(manifest):
    records = [make_record([0.5, 0.5], sample_id=f"s{i}") for i in range(4)]
    grid, summary = ingest_stream(lines_for(records), manifest)
    assert set(grid) == {CellKey(0.0, 1.0, 5)}
    assert len(grid[CellKey(0.0, 1.0, 5)].test_records) == 4
    assert summary.accepted == 4 and summary.rejected == 0


def test_two_cells_keep_own_coordinates(manifest):
    records = [
        make_record([0.5, 0.5], zs=0.0, sample_id="a"),
        make_record([0.5, 0.5], zs=0.5, sample_id="b"),
    ]
    grid, _ = ingest_stream(lines_for(records), manifest)
    assert set(grid) == {CellKey(0.0, 1.0, 5), CellKey(0.5, 1.0, 5)}
    for key, store in grid.items():
        assert all(r.cell_key == key for r in store.test_records)


def test_malformed_line_lenient(manifest):
    lines = lines_for([make_record([0.5, 0.5], sample_id=f"s{i}") for i in range(3)])
    lines.insert(1, "garbage")
    grid, summary = ingest_stream(lines, manifest)
    assert summary.rejected == 1
    assert summary.error_kinds["MalformedLine"] == 1
    assert summary.accepted == 3
    assert summary.conserved


def test_strict_mode_aborts_with_line_number(manifest):
    lines = lines_for([make_record([0.5, 0.5])])
    lines.append('{"bad": true}')
    with pytest.raises(IngestAbort) as exc:
        ingest_stream(lines, manifest, strict=True)
    assert exc.value.line_no == 2


def test_blank_lines_not_counted(manifest):
    lines = ["", *lines_for([make_record([0.5, 0.5])]), "   ", ""]
    _, summary = ingest_stream(lines, manifest)
    assert summary.total_lines == 1
    assert summary.conserved


def test_permutation_invariance(manifest):
    records = [
        make_record([0.5, 0.5], zs=zs, ssim=ssim, weight=w, sample_id=f"s{i}-{j}")
        for i, (zs, ssim, w) in enumerate(
            (a, b, c) for a in (0.0, 0.5) for b in (0.8, 1.0) for c in (5, 10)
        )
        for j in (0, 1)
    ]
    base_lines = lines_for(records)
    grid_a, _ = ingest_stream(base_lines, manifest)
    rng = random.Random(5)
    for _ in range(5):
        shuffled = base_lines[:]
        rng.shuffle(shuffled)
        grid_b, _ = ingest_stream(shuffled, manifest)
        assert set(grid_a) == set(grid_b)
        for key in grid_a:
            assert Counter(grid_a[key].test_records) == Counter(grid_b[key].test_records)
            assert Counter(grid_a[key].train_records) == Counter(grid_b[key].train_records)


def test_per_class_counts_cover_both_splits(manifest):
    records = [
        make_record([0.5, 0.5], sample_id="t1"),
        make_record([0.5, 0.5], true_class="B", sample_id="t2"),
        make_record([0.5, 0.5], split="train", sample_id="t3"),
    ]
    grid, _ = ingest_stream(lines_for(records), manifest)
    store = grid[CellKey(0.0, 1.0, 5)]
    assert store.per_class_counts == {"A": 2, "B": 1}
    assert sum(store.per_class_counts.values()) == store.n_records


def test_duplicate_sample_id_warns(manifest):
    records = [make_record([0.5, 0.5]), make_record([0.6, 0.4])]
    with pytest.warns(DuplicateSampleWarning):
        _, summary = ingest_stream(lines_for(records), manifest)
    assert summary.duplicate_sample_ids == 1
    assert summary.accepted == 2


def test_dedupe_exact_flag(manifest):
    line = record_to_json_line(make_record([0.5, 0.5]))
    grid, summary = ingest_stream([line, line], manifest, dedupe_exact=True)
    assert summary.accepted == 1
    assert summary.error_kinds["ExactDuplicate"] == 1
    assert len(grid[CellKey(0.0, 1.0, 5)].test_records) == 1


def test_coverage_full_grid(manifest):
    records = [
        make_record([0.5, 0.5], true_class=c, zs=zs, ssim=ssim, weight=w,
                    sample_id=f"{c}{zs}{ssim}{w}")
        for zs in (0.0, 0.5)
        for ssim in (0.8, 1.0)
        for w in (5, 10)
        for c in ("A", "B")
    ]
    grid, _ = ingest_stream(lines_for(records), manifest)
    entries = coverage_report(grid, manifest)
    assert len(entries) == 8
    assert not any(e.missing for e in entries)
    assert not any(e.class_gaps for e in entries)


def test_coverage_flags_missing_and_gaps(manifest):
    records = [
        make_record([0.5, 0.5], zs=0.0, sample_id="a"),  # cell with only class A
    ]
    grid, _ = ingest_stream(lines_for(records), manifest)
    entries = {e.key: e for e in coverage_report(grid, manifest)}
    assert entries[CellKey(0.0, 1.0, 5)].missing is False
    assert entries[CellKey(0.0, 1.0, 5)].class_gaps == ("B",)
    assert entries[CellKey(0.5, 1.0, 5)].missing is True


def test_ingest_files_jsonl_and_csv(tmp_path, manifest):
    jsonl = tmp_path / "a.jsonl"
    jsonl.write_text(
        "\n".join(lines_for([make_record([0.5, 0.5], sample_id="j1")])) + "\n"
    )
    csvf = tmp_path / "b.csv"
    csvf.write_text(
        "sample_id,true_class,split,zero_shot_pct,ssim,weight_num,probs,loss\n"
        "c1,B,test,0.5,1.0,10,0.1;0.9,\n"
    )
    grid, summary = ingest_files([jsonl, csvf], manifest)
    assert summary.accepted == 2
    assert CellKey(0.0, 1.0, 5) in grid and CellKey(0.5, 1.0, 10) in grid
