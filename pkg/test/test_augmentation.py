#!/usr/bin/env python3
"""
Tests for seeded augmentation and optimizer construction
"""

import sys

import numpy as np
import pytest
import torch

from core.config import ScheduleSpec
from training.augmentation import (
    IDENTITY,
    AugmentationDraw,
    SeededAugmentation,
    apply_augmentation,
    augment,
    draw_augmentation,
)
from training.optim import Lookahead, build_optimizer


@pytest.fixture
def pixels():
    return np.random.default_rng(0).integers(0, 256, (72, 96), dtype=np.uint8)


def test_identity_draw_is_noop(pixels):
    assert IDENTITY.is_identity
    np.testing.assert_array_equal(apply_augmentation(pixels, IDENTITY), pixels)


def test_same_seed_same_output(pixels):
    np.testing.assert_array_equal(augment(pixels, 11), augment(pixels, 11))
    np.testing.assert_array_equal(augment(pixels, (1, 2, 3)), augment(pixels, (1, 2, 3)))


def test_half_turn_twice_restores(pixels):
    half_turn = AugmentationDraw(quarter_turns=2)
    np.testing.assert_array_equal(apply_augmentation(apply_augmentation(pixels, half_turn), half_turn), pixels)


def test_double_flip_restores(pixels):
    flip = AugmentationDraw(horizontal_flip=True, vertical_flip=True)
    np.testing.assert_array_equal(apply_augmentation(apply_augmentation(pixels, flip), flip), pixels)


def test_quarter_turn_keeps_dims(pixels):
    out = apply_augmentation(pixels, AugmentationDraw(quarter_turns=1))
    assert out.shape == pixels.shape
    assert out.dtype == np.uint8


def test_brightness_clips(pixels):
    out = apply_augmentation(np.full((10, 10), 250, dtype=np.uint8), AugmentationDraw(brightness=1.2))
    assert out.max() == 255


def test_draw_ranges():
    rng = np.random.default_rng(5)
    for _ in range(200):
        draw = draw_augmentation(rng)
        assert 0 <= draw.quarter_turns < 4
        assert 0.8 <= draw.brightness <= 1.2


def test_seeded_augmentation_varies_by_epoch(pixels):
    transform = SeededAugmentation(3)
    first = transform(pixels, 0)
    np.testing.assert_array_equal(transform(pixels, 0), first)
    different = False
    for epoch in range(1, 6):
        transform.set_epoch(epoch)
        different |= not np.array_equal(transform(pixels, 0), first)
    assert different


@pytest.mark.parametrize("name", ["adam", "radam", "lookahead-radam"])
def test_build_optimizer(name):
    spec = ScheduleSpec(load_dotenv_file=False, optimizer=name, base_lr=1e-2)
    parameter = torch.nn.Parameter(torch.ones(3))
    optimizer = build_optimizer([parameter], spec)
    for _ in range(7):
        optimizer.zero_grad()
        (parameter ** 2).sum().backward()
        optimizer.step()
    assert float(parameter.abs().sum()) < 3.0
    assert optimizer.param_groups[0]['lr'] == pytest.approx(1e-2)


def test_lookahead_syncs_every_k_steps():
    parameter = torch.nn.Parameter(torch.zeros(1))
    optimizer = Lookahead(torch.optim.SGD([parameter], lr=1.0), k=2, alpha=0.5)
    for _ in range(2):
        optimizer.zero_grad()
        (-parameter).sum().backward()
        optimizer.step()
    # fast weights reach 2.0, slow weights move half way from 0
    assert float(parameter) == pytest.approx(1.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
