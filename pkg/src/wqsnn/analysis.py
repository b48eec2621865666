"""Weight scaling, spike rasters, firing-rate statistics and memory accounting."""

from __future__ import annotations

import io
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MODEL_KINDS = ("vogels", "brunel", "brunel+")

# bytes per neuron / synapse of each model's state fields in the reference
# (GPU) layout: Vogels V, ge, gi, refractory; Brunel V, refractory;
# Brunel+ adds weight and two traces per synapse
REFERENCE_FIELDS = {
    "vogels": (16, 0),
    "brunel": (8, 0),
    "brunel+": (8, 12),
}
ID_BYTES = 4


def _check_kind(kind: str) -> str:
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    return kind


def scaling_constant(kind: str, n: int) -> float:
    """Weight multiplier keeping a benchmark's firing pattern when resized.

    Both forms equal exactly 1 at the sizes the models were tuned for
    (4000 neurons for Vogels, 20000 for Brunel).
    """
    _check_kind(kind)
    if n <= 0:
        raise ValueError("network size must be positive")
    if kind == "vogels":
        return 16_000_000 / (n * n)
    return 20_000 / n


@dataclass
class SpikeRaster:
    """Spike records sorted by ``(step, neuron)``."""

    steps: np.ndarray
    neurons: np.ndarray
    dt: float = 1.0
    num_neurons: int = 0

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.int64)
        self.neurons = np.asarray(self.neurons, dtype=np.int64)
        if len(self.steps) > 1:
            order = np.lexsort((self.neurons, self.steps))
            if np.any(order != np.arange(len(order))):
                self.steps, self.neurons = self.steps[order], self.neurons[order]

    def __len__(self) -> int:
        return len(self.steps)

    def __eq__(self, other) -> bool:
        return (isinstance(other, SpikeRaster) and self.num_neurons == other.num_neurons
                and self.dt == other.dt and np.array_equal(self.steps, other.steps)
                and np.array_equal(self.neurons, other.neurons))

    def select(self, t0: int = 0, t1: int | None = None, exclude: range | None = None) -> "SpikeRaster":
        keep = self.steps >= t0
        if t1 is not None:
            keep &= self.steps < t1
        if exclude is not None and len(exclude):
            keep &= (self.neurons < exclude.start) | (self.neurons >= exclude.stop)
        return SpikeRaster(self.steps[keep], self.neurons[keep], self.dt, self.num_neurons)

    def counts_per_step(self, steps: int) -> np.ndarray:
        return np.bincount(self.steps, minlength=steps)[:steps]

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# dt={self.dt!r} N={self.num_neurons}\n")
        if len(self):
            np.savetxt(buf, np.column_stack([self.steps, self.neurons]), fmt="%d", delimiter="\t")
        return buf.getvalue()

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path: str | Path) -> "SpikeRaster":
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise ValueError(f"{path}: missing raster header")
            meta = dict(tok.split("=", 1) for tok in header[1:].split())
            body = fh.read()
        if body.strip():
            data = np.loadtxt(io.StringIO(body), dtype=np.int64, delimiter="\t", ndmin=2)
        else:
            data = np.zeros((0, 2), dtype=np.int64)
        return cls(data[:, 0], data[:, 1], float(meta["dt"]), int(meta["N"]))


class Recorder:
    """Engine tap collecting every step's spike frame."""

    def __init__(self, dt: float = 1.0, num_neurons: int = 0):
        self.dt = dt
        self.num_neurons = num_neurons
        self._steps: list[np.ndarray] = []
        self._ids: list[np.ndarray] = []

    def __call__(self, t: int, ids: np.ndarray) -> None:
        if len(ids):
            self._ids.append(np.array(ids, dtype=np.int32))
            self._steps.append(np.full(len(ids), t, dtype=np.int64))

    def raster(self) -> SpikeRaster:
        if not self._ids:
            return SpikeRaster(np.zeros(0), np.zeros(0), self.dt, self.num_neurons)
        return SpikeRaster(np.concatenate(self._steps), np.concatenate(self._ids),
                           self.dt, self.num_neurons)


def firing_rate(raster: SpikeRaster, n: int, steps: int) -> float:
    """Average fraction of the ``n`` neurons spiking per step."""
    if steps <= 0:
        raise ValueError("steps must be positive")
    if n <= 0:
        return 0.0
    return len(raster) / (n * steps)


def retention_band(kind: str) -> tuple[float, float]:
    from .models.params import load_params

    _check_kind(kind)
    r = load_params("retention")
    family = "vogels" if kind == "vogels" else "brunel"
    return r[f"{family}_low"], r[f"{family}_high"]


def rate_retention(kind: str, rate_at_size: float, rate_at_original: float) -> bool:
    """Whether a resized network's rate stays inside the model's band around the original."""
    low, high = retention_band(kind)
    if rate_at_original <= 0:
        return rate_at_size <= 0
    ratio = rate_at_size / rate_at_original
    return low <= ratio <= high


@dataclass
class MemoryBreakdown:
    per_neuron: dict[str, float]
    per_synapse: dict[str, float]
    num_neurons: int = 0
    num_synapses: int = 0
    actual: dict[str, dict[str, int]] | None = field(default=None, compare=False)

    @property
    def neuron_total(self) -> float:
        return sum(self.per_neuron.values())

    @property
    def synapse_total(self) -> float:
        return sum(self.per_synapse.values())

    @property
    def total_bytes(self) -> float:
        return self.neuron_total * self.num_neurons + self.synapse_total * self.num_synapses

    @property
    def actual_bytes(self) -> int | None:
        if self.actual is None:
            return None
        return sum(sum(part.values()) for part in self.actual.values())


def memory_estimate(kind: str, n: int = 0, synapses: int = 0, sim=None,
                    ring_size: int | None = None) -> MemoryBreakdown:
    """Per-neuron / per-synapse byte budget of a benchmark model.

    Spike queues hold one 4-byte id per neuron per delay step; plastic models
    add a bitmask per retained step, a synapse age and an expiry queue slot
    per neuron. Passing the running ``sim`` attaches its real allocation.
    """
    from .engine import LAZY_RING_SIZE
    from .models.params import load_params

    _check_kind(kind)
    params = load_params(kind)
    neuron_fields, synapse_fields = REFERENCE_FIELDS[kind]
    delay = int(params["delay"])
    per_neuron = {"fields": float(neuron_fields), "spikes": float(ID_BYTES * delay)}
    per_synapse = {"adjacency list": float(ID_BYTES)}
    if synapse_fields:
        ring = ring_size if ring_size is not None else max(delay + 1, LAZY_RING_SIZE)
        per_neuron.update(bitmasks=ring / 8, ages=4.0, expirations=4.0)
        per_synapse["fields"] = float(synapse_fields)
    return MemoryBreakdown(per_neuron, per_synapse, n, synapses,
                           sim.memory() if sim is not None else None)


def format_stats(stats: dict) -> str:
    return "".join(f"{k}={v}\n" for k, v in stats.items())


def write_stats(stats: dict, path: str | Path | None = None) -> None:
    text = format_stats(stats)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_stats(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            out[k] = v
    return out
