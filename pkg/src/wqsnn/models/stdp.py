"""Pair-based exponential-trace STDP with hard weight bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StdpParams:
    a_plus: float = 0.01
    a_minus: float = 0.012
    tau_plus: float = 20.0
    tau_minus: float = 20.0
    w_min: float = 0.0
    w_max: float = 1.0

    def __post_init__(self):
        if not 0 <= self.w_min < self.w_max:
            raise ValueError("need 0 <= w_min < w_max")

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "StdpParams":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def decay(self, dt: float) -> tuple[np.float32, np.float32]:
        # fixed float32 factors keep lazy and eager updates bit-identical
        return np.float32(math.exp(-dt / self.tau_plus)), np.float32(math.exp(-dt / self.tau_minus))


def stdp_step(w, pre_trace, post_trace, pre, post, p: StdpParams, dt: float):
    """One step on raw arrays: decay, depress on pre, potentiate on post."""
    f_plus, f_minus = p.decay(dt)
    pre_trace = pre_trace * f_plus
    post_trace = post_trace * f_minus
    w = np.where(pre, np.clip(w - np.float32(p.a_minus) * post_trace, p.w_min, p.w_max), w)
    pre_trace = np.where(pre, pre_trace + np.float32(1), pre_trace)
    w = np.where(post, np.clip(w + np.float32(p.a_plus) * pre_trace, p.w_min, p.w_max), w)
    post_trace = np.where(post, post_trace + np.float32(1), post_trace)
    return w.astype(np.float32), pre_trace.astype(np.float32), post_trace.astype(np.float32)


def stdp_synapse_update(syn, pre, post, p: StdpParams, dt: float, mask=None) -> None:
    """Apply :func:`stdp_step` to a synapse view with fields ``weight``, ``pre_trace``, ``post_trace``.

    Entries where ``mask`` is false are left untouched.
    """
    w, x, y = syn.weight, syn.pre_trace, syn.post_trace
    w2, x2, y2 = stdp_step(w, x, y, pre, post, p, dt)
    if mask is not None:
        w2, x2, y2 = np.where(mask, w2, w), np.where(mask, x2, x), np.where(mask, y2, y)
    syn.weight = w2
    syn.pre_trace = x2
    syn.post_trace = y2
