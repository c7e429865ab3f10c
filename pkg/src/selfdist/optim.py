"""Hand-rolled Adam optimizer over dicts of numpy arrays."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamConfig:
    lr: float = 1e-2
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class Adam:
    """Adam over a dict of parameter arrays, updated in place."""

    config: AdamConfig = field(default_factory=AdamConfig)

    def __post_init__(self):
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self._t = 0

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        c = self.config
        self._t += 1
        for key, g in grads.items():
            if key not in self._m:
                self._m[key] = np.zeros_like(params[key])
                self._v[key] = np.zeros_like(params[key])
            m = self._m[key]
            v = self._v[key]
            m *= c.beta1
            m += (1.0 - c.beta1) * g
            v *= c.beta2
            v += (1.0 - c.beta2) * g * g
            mhat = m / (1.0 - c.beta1 ** self._t)
            vhat = v / (1.0 - c.beta2 ** self._t)
            params[key] -= c.lr * mhat / (np.sqrt(vhat) + c.eps)
