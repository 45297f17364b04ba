"""Digit image pools: pretraining split, probe training split, test pool.

Images are 8x8 grayscale scaled to [0, 1]. The probe's training pool
holds seen-class images only; the test pool holds held-out images of all
vocabulary classes. Splits are deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.datasets import load_digits


@dataclass(frozen=True)
class Pools:
    pretrain_images: np.ndarray
    pretrain_labels: np.ndarray  # remapped to 0..len(pretrain_digits)-1
    train_images: np.ndarray  # seen-class probe training images
    train_digits: np.ndarray  # original digit values
    test_images: np.ndarray  # held-out vocabulary-class images
    test_digits: np.ndarray
    test_pool_ids: np.ndarray  # stable sample identifiers (dataset indexes)


def build_pools(
    vocabulary_digits, seen_digits, pretrain_digits, seed: int, train_fraction=0.5
) -> Pools:
    data = load_digits()
    images = data.images.astype(np.float64) / 16.0
    labels = data.target
    rng = np.random.default_rng(seed)

    pre_mask = np.isin(labels, pretrain_digits)
    remap = {d: i for i, d in enumerate(pretrain_digits)}
    pre_labels = np.array([remap[d] for d in labels[pre_mask]])

    train_idx: list[int] = []
    test_idx: list[int] = []
    for digit in vocabulary_digits:
        idx = np.flatnonzero(labels == digit)
        idx = idx[rng.permutation(len(idx))]
        if digit in seen_digits:
            cut = int(len(idx) * train_fraction)
            train_idx.extend(idx[:cut])
            test_idx.extend(idx[cut:])
        else:
            test_idx.extend(idx)  # unseen classes are never trained on

    train_idx = np.array(sorted(train_idx))
    test_idx = np.array(sorted(test_idx))
    return Pools(
        pretrain_images=images[pre_mask],
        pretrain_labels=pre_labels,
        train_images=images[train_idx],
        train_digits=labels[train_idx],
        test_images=images[test_idx],
        test_digits=labels[test_idx],
        test_pool_ids=test_idx,
    )


def assemble_cell_indices(
    pools: Pools, seen_digits, unseen_digits, zero_shot_pct: float,
    n_samples: int, rng: np.random.Generator,
) -> np.ndarray:
    """Pick test-pool indexes mixing unseen classes at the target fraction.

    The unseen share is round(fraction * n); remaining slots are seen
    classes. Within each side, classes are balanced and samples drawn
    without replacement from the held-out pool.
    """
    n_unseen = round(zero_shot_pct * n_samples)
    n_seen = n_samples - n_unseen
    chosen: list[int] = []
    for digits, count in ((unseen_digits, n_unseen), (seen_digits, n_seen)):
        if count == 0:
            continue
        per_class = np.full(len(digits), count // len(digits))
        per_class[: count % len(digits)] += 1
        for digit, take in zip(digits, per_class):
            candidates = np.flatnonzero(pools.test_digits == digit)
            if take > len(candidates):
                raise ValueError(
                    f"test pool has only {len(candidates)} samples of digit "
                    f"{digit}, needed {take}"
                )
            picked = rng.choice(candidates, size=int(take), replace=False)
            chosen.extend(int(i) for i in picked)
    return np.array(sorted(chosen))
