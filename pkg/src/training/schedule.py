#!/usr/bin/env python3
"""
Learning-rate schedule: constant for the first ``hold_fraction`` of training,
cosine annealing towards zero afterwards.
"""

import math

from torch.optim import Optimizer
from torch.optim.lr_scheduler import LambdaLR

from core.config import ScheduleSpec


def lr_at(step: int, total_steps: int, spec: ScheduleSpec) -> float:
    hold = spec.hold_fraction * total_steps
    if step < hold:
        return spec.base_lr
    progress = (step - hold) / (total_steps - hold)
    return spec.base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))


def build_scheduler(optimizer: Optimizer, total_steps: int, spec: ScheduleSpec) -> LambdaLR:
    """Per-step scheduler; the optimizer's lr must equal spec.base_lr"""
    last = max(total_steps - 1, 0)

    def factor(step: int) -> float:
        return lr_at(min(step, last), total_steps, spec) / spec.base_lr

    return LambdaLR(optimizer, factor)
