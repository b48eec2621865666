"""Leaky integrate-and-fire and Poisson building blocks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Model, NeuronView


@dataclass(frozen=True)
class LifParams:
    tau_m: float = 20.0
    v_rest: float = 0.0
    v_reset: float = 10.0
    v_threshold: float = 20.0
    refractory: float = 2.0  # ms
    background: float = 0.0  # mV/ms

    def __post_init__(self):
        if not self.tau_m > 0:
            raise ValueError("tau_m must be positive")
        if not self.v_threshold > self.v_reset:
            raise ValueError("v_threshold must exceed v_reset")

    @classmethod
    def from_dict(cls, d: dict[str, float]) -> "LifParams":
        return cls(**{k: d[k] for k in cls.__dataclass_fields__ if k in d})

    def refractory_steps(self, dt: float) -> int:
        return int(round(self.refractory / dt))


def lif_step(v, inp, ref, p: LifParams, dt: float):
    """Vectorised LIF rule on raw arrays; returns ``(v, ref, spike)``.

    Neurons with ``ref > 0`` are held at ``v_reset`` and count down.
    """
    active = ref <= 0
    v_new = v + dt * (-(v - p.v_rest) / p.tau_m) + inp + dt * p.background
    spike = active & (v_new >= p.v_threshold)
    v_out = np.where(active & ~spike, v_new, p.v_reset).astype(v.dtype, copy=False)
    ref_out = np.where(spike, p.refractory_steps(dt), np.maximum(ref - 1, 0)).astype(ref.dtype, copy=False)
    return v_out, ref_out, spike


def lif_update(n: NeuronView, p: LifParams, dt: float) -> np.ndarray:
    """Integrate accumulated input ``I`` into ``V``, clear it, spike at threshold."""
    v, ref, spike = lif_step(n.V, n.I, n.refractory, p, dt)
    n.V = v
    n.I = 0
    n.refractory = ref
    return spike


def lif_receive(dst: NeuronView, weight, c: float = 1.0) -> None:
    """Deliver ``c * weight`` into the targets' input accumulator."""
    dst.add("I", np.float32(c) * np.asarray(weight, dtype=np.float32))


def poisson_update(n: NeuronView, rate: float, dt: float) -> np.ndarray:
    """Spike with probability ``rate * dt`` using each neuron's own stream."""
    return n.uniform() <= rate * dt


def check_poisson(rate: float, dt: float) -> None:
    if rate < 0 or rate * dt > 1:
        raise ValueError(f"poisson rate {rate}/ms is not a probability per step of {dt} ms")


class LifModel(Model):
    """Population of LIF neurons with fields ``V``, ``I`` and ``refractory``.

    Subclasses choose the weight of each delivered spike by overriding
    :meth:`weight`.
    """

    neuron_fields = [("V", np.float32), ("I", np.float32), ("refractory", np.int32)]

    def __init__(self, params: LifParams, scale: float = 1.0):
        self.lif = params
        self.scale = scale

    def init(self, n):
        n.V = self.lif.v_rest

    def update(self, n, dt):
        return lif_update(n, self.lif, dt)

    def weight(self, src: NeuronView, syn=None) -> np.ndarray:
        raise NotImplementedError

    def receive(self, src, dst, syn=None):
        lif_receive(dst, self.weight(src, syn), self.scale)
