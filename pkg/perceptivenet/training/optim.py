"""
Adam optimiser state.
"""

from typing import Iterable, Tuple

import torch

from ..constants import ADAM_BETAS, ADAM_EPS, DEFAULT_LR


class AdamState:
    """
    Adam with bias correction over a fixed set of parameters.

    Attributes:
        optimizer (torch.optim.Adam): Holds the first and second moments
        step_count (int): Completed updates
    """

    def __init__(
        self,
        params: Iterable[torch.nn.Parameter],
        lr: float = DEFAULT_LR,
        betas: Tuple[float, float] = ADAM_BETAS,
        eps: float = ADAM_EPS,
    ):
        self.params = [p for p in params if p.requires_grad]
        self.optimizer = torch.optim.Adam(self.params, lr=lr, betas=tuple(betas), eps=eps, foreach=False)
        self.step_count = 0

    @property
    def lr(self) -> float:
        return self.optimizer.param_groups[0]["lr"]

    @classmethod
    def from_config(cls, params: Iterable[torch.nn.Parameter], config) -> "AdamState":
        return cls(params, lr=config.lr, betas=config.betas, eps=config.eps)


def adam_step(state: AdamState) -> None:
    """Apply one Adam update from the parameters' current ``.grad`` and advance the step counter."""
    state.optimizer.step()
    state.step_count += 1
