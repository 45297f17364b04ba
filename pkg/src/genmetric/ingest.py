"""Streaming ingestion: validate record lines and group them per cell.

Grouping is permutation-invariant: any ordering of the input lines yields
the same per-cell multisets. Accepted + rejected always equals the number
of non-blank lines read.
"""

from __future__ import annotations

import csv
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DuplicateSampleWarning, IngestAbort, ValidationError
from .records import (
    CellKey,
    Manifest,
    PredictionRecord,
    parse_record_csv_row,
    parse_record_line,
    validate_record,
)


@dataclass(frozen=True)
class CellStore:
    """All records of one grid cell, split into test and train sides."""

    key: CellKey
    test_records: tuple[PredictionRecord, ...]
    train_records: tuple[PredictionRecord, ...]
    per_class_counts: Mapping[str, int]

    @property
    def n_records(self) -> int:
        return len(self.test_records) + len(self.train_records)


@dataclass
class IngestSummary:
    sources: list[str] = field(default_factory=list)
    total_lines: int = 0
    accepted: int = 0
    rejected: int = 0
    error_kinds: Counter = field(default_factory=Counter)
    cell_counts: dict[CellKey, int] = field(default_factory=dict)
    duplicate_sample_ids: int = 0

    @property
    def conserved(self) -> bool:
        return self.accepted + self.rejected == self.total_lines


@dataclass(frozen=True)
class CoverageEntry:
    key: CellKey
    missing: bool
    class_gaps: tuple[str, ...]


class _Accumulator:
    """Mutable grouping state; frozen into CellStores when ingestion ends."""

    def __init__(self) -> None:
        self.test: dict[CellKey, list[PredictionRecord]] = {}
        self.train: dict[CellKey, list[PredictionRecord]] = {}
        self.seen_ids: set[tuple[CellKey, str, str]] = set()
        self.duplicates = 0

    def add(self, record: PredictionRecord) -> None:
        key = record.cell_key
        bucket = self.test if record.split == "test" else self.train
        bucket.setdefault(key, []).append(record)
        ident = (key, record.split, record.sample_id)
        if ident in self.seen_ids:
            self.duplicates += 1
        else:
            self.seen_ids.add(ident)

    def freeze(self) -> dict[CellKey, CellStore]:
        grid: dict[CellKey, CellStore] = {}
        for key in sorted(set(self.test) | set(self.train)):
            test = tuple(self.test.get(key, ()))
            train = tuple(self.train.get(key, ()))
            counts = Counter(r.true_class for r in test)
            counts.update(r.true_class for r in train)
            grid[key] = CellStore(
                key=key,
                test_records=test,
                train_records=train,
                per_class_counts=dict(counts),
            )
        return grid


def _consume(
    parsed: Iterable[tuple[int, PredictionRecord | ValidationError]],
    manifest: Manifest,
    strict: bool,
    source: str,
    acc: _Accumulator,
    summary: IngestSummary,
) -> None:
    for line_no, item in parsed:
        summary.total_lines += 1
        err: ValidationError | None = None
        if isinstance(item, ValidationError):
            err = item
        else:
            try:
                validate_record(item, manifest)
            except ValidationError as exc:
                err = exc
        if err is not None:
            if strict:
                raise IngestAbort(source, line_no, err)
            summary.rejected += 1
            summary.error_kinds[err.kind] += 1
            continue
        assert isinstance(item, PredictionRecord)
        acc.add(item)
        summary.accepted += 1
        key = item.cell_key
        summary.cell_counts[key] = summary.cell_counts.get(key, 0) + 1


def _parse_jsonl(
    lines: Iterable[str], strict: bool, dedupe_exact: bool
) -> Iterable[tuple[int, PredictionRecord | ValidationError]]:
    seen: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue  # blank lines are not counted as read records
        if dedupe_exact:
            if line in seen:
                yield line_no, ValidationError("ExactDuplicate", "duplicate line")
                continue
            seen.add(line)
        try:
            yield line_no, parse_record_line(line, strict=strict)
        except ValidationError as exc:
            yield line_no, exc


def ingest_stream(
    lines: Iterable[str],
    manifest: Manifest,
    strict: bool = False,
    dedupe_exact: bool = False,
    source: str = "<stream>",
) -> tuple[dict[CellKey, CellStore], IngestSummary]:
    """Ingest JSONL record lines into per-cell stores.

    Non-strict mode tallies invalid lines per error kind and keeps going;
    strict mode raises IngestAbort at the first invalid line. When
    dedupe_exact is set, byte-identical repeat lines are rejected with
    kind "ExactDuplicate" (repeat sample_ids with differing payloads are
    always kept, with a warning).
    """
    acc = _Accumulator()
    summary = IngestSummary(sources=[source])
    _consume(_parse_jsonl(lines, strict, dedupe_exact), manifest, strict, source, acc, summary)
    return _finish(acc, summary)


def _finish(acc: _Accumulator, summary: IngestSummary):
    summary.duplicate_sample_ids = acc.duplicates
    if acc.duplicates:
        warnings.warn(
            f"{acc.duplicates} records repeat a sample_id within one cell and split",
            DuplicateSampleWarning,
            stacklevel=3,
        )
    return acc.freeze(), summary


def _parse_csv(
    fp, strict: bool, dedupe_exact: bool
) -> Iterable[tuple[int, PredictionRecord | ValidationError]]:
    reader = csv.DictReader(fp)
    seen: set[tuple] = set()
    for row_no, row in enumerate(reader, start=2):  # header is line 1
        if dedupe_exact:
            ident = tuple(sorted((k, v) for k, v in row.items() if k is not None))
            if ident in seen:
                yield row_no, ValidationError("ExactDuplicate", "duplicate row")
                continue
            seen.add(ident)
        if None in row:  # extra unnamed columns
            yield row_no, ValidationError("MalformedLine", "row has extra columns")
            continue
        try:
            yield row_no, parse_record_csv_row(row, strict=strict)
        except ValidationError as exc:
            yield row_no, exc


def ingest_files(
    paths: Iterable[str | Path],
    manifest: Manifest,
    strict: bool = False,
    dedupe_exact: bool = False,
) -> tuple[dict[CellKey, CellStore], IngestSummary]:
    """Ingest one or more record files (JSONL or CSV by extension).

    Multiple files are concatenated logically: the result equals a single
    ingest over all their lines.
    """
    acc = _Accumulator()
    summary = IngestSummary()
    for path in paths:
        path = Path(path)
        summary.sources.append(str(path))
        with open(path, "r", encoding="utf-8", newline="") as fp:
            if path.suffix.lower() == ".csv":
                parsed = _parse_csv(fp, strict, dedupe_exact)
            else:
                parsed = _parse_jsonl(fp, strict, dedupe_exact)
            _consume(parsed, manifest, strict, str(path), acc, summary)
    return _finish(acc, summary)


def coverage_report(
    grid: Mapping[CellKey, CellStore], manifest: Manifest
) -> list[CoverageEntry]:
    """Enumerate the full Cartesian grid and flag coverage holes.

    A cell is missing when it has zero test records; for populated cells
    the vocabulary classes absent from the test split are listed as gaps.
    """
    axes = manifest.axes
    entries = []
    for x in axes.zero_shot_levels:
        for y in axes.ssim_levels:
            for z in axes.weight_nums:
                key = CellKey(x, y, z)
                store = grid.get(key)
                if store is None or not store.test_records:
                    entries.append(CoverageEntry(key, True, ()))
                    continue
                present = {r.true_class for r in store.test_records}
                gaps = tuple(c for c in manifest.class_vocabulary if c not in present)
                entries.append(CoverageEntry(key, False, gaps))
    return entries
