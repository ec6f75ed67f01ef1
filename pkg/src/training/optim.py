#!/usr/bin/env python3
"""
Optimizer construction (adam, radam, lookahead-radam).
"""

from collections import defaultdict
from typing import Iterable

import torch
from torch.optim import Optimizer

from core.config import ScheduleSpec
from core.errors import ConfigError


class Lookahead(Optimizer):
    """Keeps slow weights and pulls them towards the inner optimizer's fast weights every k steps"""

    def __init__(self, inner: Optimizer, k: int = 6, alpha: float = 0.5):
        if k < 1 or not 0.0 < alpha <= 1.0:
            raise ConfigError(f"Invalid lookahead settings k={k}, alpha={alpha}")
        self.inner = inner
        self.k = k
        self.alpha = alpha
        self.param_groups = inner.param_groups
        self.defaults = inner.defaults
        self.state = defaultdict(dict)
        self._steps = 0
        for group in self.param_groups:
            for param in group["params"]:
                self.state[param]["slow"] = param.detach().clone()

    @torch.no_grad()
    def step(self, closure=None):
        loss = self.inner.step(closure)
        self._steps += 1
        if self._steps % self.k == 0:
            for group in self.param_groups:
                for param in group["params"]:
                    slow = self.state[param]["slow"]
                    slow.add_(param - slow, alpha=self.alpha)
                    param.copy_(slow)
        return loss

    def zero_grad(self, set_to_none: bool = True) -> None:
        self.inner.zero_grad(set_to_none=set_to_none)

    def state_dict(self):
        return {"inner": self.inner.state_dict(), "steps": self._steps}

    def load_state_dict(self, state_dict) -> None:
        self.inner.load_state_dict(state_dict["inner"])
        self._steps = state_dict["steps"]


def build_optimizer(parameters: Iterable[torch.nn.Parameter], spec: ScheduleSpec) -> Optimizer:
    parameters = list(parameters)
    if spec.optimizer == "adam":
        return torch.optim.Adam(parameters, lr=spec.base_lr)
    if spec.optimizer == "radam":
        return torch.optim.RAdam(parameters, lr=spec.base_lr)
    if spec.optimizer == "lookahead-radam":
        return Lookahead(torch.optim.RAdam(parameters, lr=spec.base_lr))
    raise ConfigError(f"Unknown optimizer '{spec.optimizer}'")
