"""Tiny convolutional backbones and the linear probe.

A backbone is pretrained once per run (seeded, CPU-deterministic) on
digit classes disjoint from the probe vocabulary, then frozen; the probe
is a single linear layer over all vocabulary classes trained with
cross-entropy on seen-class samples only. Unseen-class head weights stay
at initialization, which is exactly the zero-shot situation the sweep
measures.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


class BackboneLoadError(RuntimeError):
    """The backbone could not be constructed or pretrained."""


class TinyConvNet(nn.Module):
    """Two conv blocks over 8x8 grayscale images; feature dim = 8 * width."""

    def __init__(self, width: int):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(1, width, 3, padding=1),
            nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Conv2d(width, 2 * width, 3, padding=1),
            nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Flatten(),
        )
        self.feature_dim = 8 * width

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.features(x)


def parameter_count(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


def _as_batch(images: np.ndarray) -> torch.Tensor:
    return torch.from_numpy(images.astype(np.float32)).unsqueeze(1)


def pretrain_backbone(
    width: int,
    images: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    epochs: int,
    seed: int,
) -> TinyConvNet:
    """Fit a backbone + throwaway head on the pretraining classes, freeze it."""
    try:
        torch.manual_seed(seed)
        backbone = TinyConvNet(width)
        head = nn.Linear(backbone.feature_dim, n_classes)
        params = list(backbone.parameters()) + list(head.parameters())
        opt = torch.optim.Adam(params, lr=1e-2)
        loss_fn = nn.CrossEntropyLoss()
        x = _as_batch(images)
        y = torch.from_numpy(labels.astype(np.int64))
        order = torch.randperm(len(x))
        x, y = x[order], y[order]
        backbone.train()
        for _ in range(epochs):
            for start in range(0, len(x), 128):
                xb, yb = x[start : start + 128], y[start : start + 128]
                opt.zero_grad()
                loss = loss_fn(head(backbone(xb)), yb)
                loss.backward()
                opt.step()
    except RuntimeError as exc:
        raise BackboneLoadError(f"pretraining width-{width} backbone failed: {exc}")
    backbone.eval()
    for p in backbone.parameters():
        p.requires_grad_(False)
    return backbone


def extract_features(backbone: TinyConvNet, images: np.ndarray) -> torch.Tensor:
    with torch.no_grad():
        return backbone(_as_batch(images))


def train_probe(
    features: torch.Tensor,
    class_indices: np.ndarray,
    n_vocab: int,
    epochs: int,
    seed: int,
) -> nn.Linear:
    """Linear head over the full vocabulary, trained on seen-class rows only."""
    torch.manual_seed(seed)
    probe = nn.Linear(features.shape[1], n_vocab)
    opt = torch.optim.Adam(probe.parameters(), lr=5e-2)
    loss_fn = nn.CrossEntropyLoss()
    y = torch.from_numpy(class_indices.astype(np.int64))
    for _ in range(epochs):
        opt.zero_grad()
        loss = loss_fn(probe(features), y)
        loss.backward()
        opt.step()
    probe.eval()
    for p in probe.parameters():
        p.requires_grad_(False)
    return probe


def predict_probs(backbone: TinyConvNet, probe: nn.Linear, images: np.ndarray) -> np.ndarray:
    """Softmax probabilities, renormalized in float64 so rows sum to 1."""
    with torch.no_grad():
        logits = probe(extract_features(backbone, images))
        probs = torch.softmax(logits, dim=1).double().numpy()
    return probs / probs.sum(axis=1, keepdims=True)
