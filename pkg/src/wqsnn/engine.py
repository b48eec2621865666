"""Clock-driven simulation pipeline.

Each :meth:`Simulation.step` moves the network from ``t`` to ``t + 1``:

1. *Update Neurons* calls ``model.update`` and appends spiking ids to the
   queue ``S_t`` (plus, with lazy plasticity, the queue of expiring neurons).
2. *Update Synapses* (plastic models only) brings the outgoing synapses of
   the neurons that need it up to date, querying ``S_{t-d}`` for presynaptic
   and ``S_t`` for postsynaptic spikes through per-frame bitmasks.
3. *Receive Spikes* takes the due frame ``S_{t-d+1}`` from the delay ring
   and calls ``model.receive`` once per (spike, recipient).

A spike emitted during step ``t`` is therefore delivered during step
``t + d - 1``, the step that produces state ``t + d``.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .adjacency import AdjacencyList, build_adjacency
from .models.base import FieldStore, Model, NeuronView, SynapseView
from .network import NetworkDescriptor, validate
from .rng import XorshiftLanes

LAZY_RING_SIZE = 50
PLASTICITY_MODES = ("lazy", "eager")


class InvariantViolation(RuntimeError):
    pass


class AtomicCounter:
    """Shared insertion index; ``fetch_add`` is indivisible."""

    def __init__(self, value: int = 0):
        self.value = value
        self._lock = threading.Lock()

    def fetch_add(self, k: int) -> int:
        with self._lock:
            old = self.value
            self.value = old + k
        return old


class SpikeQueue:
    """Fixed-capacity id array bundled with an insertion counter."""

    def __init__(self, entries: np.ndarray):
        self.entries = entries
        self.counter = AtomicCounter()

    def __len__(self) -> int:
        return self.counter.value

    @property
    def capacity(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> np.ndarray:
        return self.entries[:self.counter.value]

    def clear(self) -> None:
        self.counter.value = 0

    def append(self, ids: np.ndarray) -> None:
        k = len(ids)
        if not k:
            return
        start = self.counter.fetch_add(k)
        if start + k > self.capacity:
            raise InvariantViolation("spike queue overflow")
        self.entries[start:start + k] = ids

    def sort(self) -> None:
        self.entries[:len(self)].sort()


class SpikeRing:
    """Circular spike history.

    Queues are kept for the ``queue_frames`` most recent steps (enough for
    delivery); bitmasks, one bit per neuron, for the ``history`` most recent
    steps (enough for plasticity queries). Frames are addressed by absolute
    step number.
    """

    def __init__(self, num_neurons: int, queue_frames: int, history: int = 0):
        self.num_neurons = num_neurons
        self.queue_frames = queue_frames
        self.history = history
        self._queue_data = np.zeros((queue_frames, num_neurons), dtype=np.int32)
        self.queues = [SpikeQueue(self._queue_data[k]) for k in range(queue_frames)]
        self.bits = np.zeros((history, (num_neurons + 7) // 8), dtype=np.uint8) if history else None
        self.t = -1

    @property
    def size(self) -> int:
        return max(self.queue_frames, self.history)

    def reset(self) -> None:
        for q in self.queues:
            q.clear()
        if self.bits is not None:
            self.bits[:] = 0
        self.t = -1

    def begin(self, t: int) -> SpikeQueue:
        """Rotate so that frame ``t`` is the head; its old contents are dropped."""
        self.t = t
        q = self.queues[t % self.queue_frames]
        q.clear()
        if self.bits is not None:
            self.bits[t % self.history] = 0
        return q

    def queue(self, t: int) -> SpikeQueue | None:
        if t < 0 or t > self.t:
            return None
        if self.t - t >= self.queue_frames:
            raise InvariantViolation(f"frame {t} no longer retained at step {self.t}")
        return self.queues[t % self.queue_frames]

    def mark(self, t: int, ids: np.ndarray) -> None:
        if self.bits is None:
            return
        mask = np.zeros(self.bits.shape[1] * 8, dtype=bool)
        mask[ids] = True
        self.bits[t % self.history] = np.packbits(mask, bitorder="little")

    def bit(self, ids: np.ndarray, t: int) -> np.ndarray:
        """Whether each neuron in ``ids`` spiked at step ``t``."""
        if t < 0:
            return np.zeros(len(ids), dtype=bool)
        if self.bits is None or not 0 <= self.t - t < self.history:
            raise InvariantViolation(f"bitmask for step {t} not retained at step {self.t}")
        frame = self.bits[t % self.history]
        return ((frame[ids >> 3] >> (ids & 7).astype(np.uint8)) & 1).astype(bool)

    def popcount(self, t: int) -> int:
        return int(np.unpackbits(self.bits[t % self.history]).sum())

    @property
    def nbytes(self) -> dict[str, int]:
        return {"spikes": self._queue_data.nbytes,
                "bitmasks": 0 if self.bits is None else self.bits.nbytes}


class Simulation:
    """A network instance: topology, state and the stage pipeline.

    ``threads > 1`` with ``deterministic=False`` runs each stage's work
    items on a thread pool. Deterministic mode processes work items in
    ascending id order on the calling thread and gives bit-identical
    results for a fixed seed.
    """

    def __init__(self, desc: NetworkDescriptor, model: Model, seed: int = 0, *,
                 plasticity: str = "lazy", ring_size: int | None = None,
                 threads: int = 1, deterministic: bool = True,
                 instrumented: bool = False, adjacency: AdjacencyList | None = None):
        validate(desc)
        if plasticity not in PLASTICITY_MODES:
            raise ValueError(f"plasticity must be one of {PLASTICITY_MODES}")
        self.desc = desc
        self.model = model
        self.seed = seed
        self.dt = desc.dt
        self.delay = desc.delay
        self.threads = max(1, int(threads))
        self.deterministic = deterministic or self.threads == 1
        self.instrumented = instrumented
        self.plasticity = plasticity if model.plastic else None
        self.taps: list[Callable[[int, np.ndarray], None]] = []
        self.synapse_updates = 0
        self.timings: dict[str, float] = {}
        self._pool = ThreadPoolExecutor(self.threads) if not self.deterministic else None

        n = desc.num_neurons
        t0 = time.perf_counter()
        self.adjacency = adjacency if adjacency is not None else build_adjacency(desc, seed, self.threads)
        self.timings["construct"] = time.perf_counter() - t0
        if self.adjacency.num_neurons != n:
            raise ValueError("adjacency does not match descriptor")
        self._deg = self.adjacency.degrees.astype(np.int64)
        self._rows = self.adjacency.table[:, :self.adjacency.deg_max]
        self._cols = np.arange(self.adjacency.deg_max)

        d = self.delay
        if self.plasticity == "lazy":
            history = ring_size if ring_size is not None else max(d + 1, LAZY_RING_SIZE)
            if history < d + 1:
                raise ValueError(f"ring size must be at least delay + 1 = {d + 1}")
        elif self.plasticity == "eager":
            history = d + 1
        else:
            history = d if instrumented else 0
        self.ring = SpikeRing(n, d, history)
        # a neuron may lag at most this many steps before its synapses must be
        # brought current, else the oldest presynaptic frame falls out of the ring
        self.max_lag = history - d - 1

        self.neurons = FieldStore(model.neuron_fields, n)
        self.neurons.set_concurrent(not self.deterministic)
        cap = n * self.adjacency.deg_max if model.has_synapse_state else 0
        self.synapses = FieldStore(model.synapse_fields, cap)
        self.synapses.set_concurrent(not self.deterministic)
        self.ages = np.zeros(n, dtype=np.int32) if self.plasticity else None
        self.expiring = SpikeQueue(np.zeros(n, dtype=np.int32)) if self.plasticity == "lazy" else None
        self._streams: XorshiftLanes | None = None
        self.t = 0
        self.init()

    # -- setup -------------------------------------------------------------

    @property
    def num_neurons(self) -> int:
        return self.desc.num_neurons

    def _get_streams(self) -> XorshiftLanes:
        if self._streams is None:
            self._streams = XorshiftLanes.seeded(self.seed, self.num_neurons, salt=0x5EED)
        return self._streams

    def view(self, index=None) -> NeuronView:
        if index is None:
            index = slice(0, self.num_neurons)
        return NeuronView(self.neurons, index, self._get_streams)

    def init(self) -> None:
        """Reset to ``N_0`` / ``Syn_0``: fresh fields, streams, ages and ring."""
        t0 = time.perf_counter()
        for arr in self.neurons.fields.values():
            arr[:] = 0
        self._streams = None
        self.model.init(self.view())
        t1 = time.perf_counter()
        if self.model.has_synapse_state and self.synapses.size:
            for arr in self.synapses.fields.values():
                arr[:] = 0
            src, dst, sidx = self._outgoing(np.arange(self.num_neurons))
            self.model.synapse_init(SynapseView(self.synapses.fields, sidx, src, dst))
        self.timings["init_neurons"] = t1 - t0
        self.timings["init_synapses"] = time.perf_counter() - t1
        if self.ages is not None:
            self.ages[:] = 0
        self.ring.reset()
        self.synapse_updates = 0
        self.t = 0

    def _outgoing(self, ids: np.ndarray, with_index: bool = True):
        """Flattened (source, target, synapse index) of every outgoing edge of ``ids``."""
        ids = np.asarray(ids, dtype=np.int64)
        counts = self._deg[ids]
        rows = self._rows[ids]
        mask = self._cols < counts[:, None]
        src = np.repeat(ids, counts)
        dst = rows[mask]
        if not with_index:
            return src, dst, None
        col = np.nonzero(mask)[1]
        return src, dst, src * self.adjacency.deg_max + col

    # -- stages --------------------------------------------------------------

    def _chunks(self, n: int) -> list[slice]:
        k = min(self.threads * 4, max(1, n))
        bounds = np.linspace(0, n, k + 1).astype(int)
        return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def update_neurons(self, t: int) -> SpikeQueue:
        queue = self.ring.begin(t)
        n = self.num_neurons

        def work(sl: slice):
            spikes = np.asarray(self.model.update(self.view(sl), self.dt), dtype=bool)
            queue.append((np.flatnonzero(spikes) + sl.start).astype(np.int32))

        if self.deterministic:
            work(slice(0, n))
        else:
            list(self._pool.map(work, self._chunks(n)))
            queue.sort()
        self.ring.mark(t, queue.ids)

        if self.expiring is not None:
            self.expiring.clear()
            self.expiring.append(np.flatnonzero(t - self.ages >= self.max_lag).astype(np.int32))
        return queue

    def update_synapses(self, t: int, ids: np.ndarray) -> None:
        """Advance the outgoing synapses of ``ids`` through step ``t`` inclusive."""
        ids = np.unique(np.asarray(ids, dtype=np.int64))
        if not len(ids):
            return
        if self.deterministic or len(ids) < 2:
            self.synapse_updates += self._catch_up(ids, t)
        else:
            parts = np.array_split(ids, min(len(ids), self.threads * 4))
            self.synapse_updates += sum(self._pool.map(lambda p: self._catch_up(p, t), parts))
        self.ages[ids] = t + 1

    def _catch_up(self, ids: np.ndarray, t: int) -> int:
        start = self.ages[ids].astype(np.int64)
        if np.any(t - start > self.max_lag):
            raise InvariantViolation(f"synapse history exhausted at step {t}")
        order = np.argsort(start, kind="stable")
        ids, start = ids[order], start[order]
        keep = self._deg[ids] > 0
        ids, start = ids[keep], start[keep]
        if not len(ids):
            return 0
        src, dst, sidx = self._outgoing(ids)
        first = np.repeat(start, self._deg[ids])
        # work on private copies, write back once
        local = {name: arr[sidx] for name, arr in self.synapses.fields.items()}
        d = self.delay
        count = 0
        for u in range(int(start[0]), t + 1):
            k = int(np.searchsorted(first, u, side="right"))
            sel = slice(0, k)
            s, g = src[sel], dst[sel]
            pre = self.ring.bit(s, u - d)
            post = self.ring.bit(g, u)
            self.model.synapse_update(SynapseView(local, sel, s, g), pre, post, self.dt)
            count += k
        for name, arr in self.synapses.fields.items():
            arr[sidx] = local[name]
        return count

    def receive_spikes(self, spikes: np.ndarray) -> None:
        if not len(spikes):
            return

        def work(ids):
            stateful = self.model.has_synapse_state
            src, dst, sidx = self._outgoing(ids, with_index=stateful)
            if not len(src):
                return
            syn = SynapseView(self.synapses.fields, sidx, src, dst) if stateful else None
            self.model.receive(self.view(src), self.view(dst), syn)

        if self.deterministic:
            work(spikes)
        else:
            parts = np.array_split(spikes, min(len(spikes), self.threads * 4))
            list(self._pool.map(work, parts))

    def step(self) -> np.ndarray:
        """Advance one timestep; returns the ids that spiked (``S_t``)."""
        t = self.t
        frame = self.update_neurons(t)
        spikes = frame.ids
        due = self.ring.queue(t - self.delay + 1)
        due_ids = due.ids if due is not None else spikes[:0]
        if self.plasticity == "eager":
            self.update_synapses(t, np.arange(self.num_neurons))
        elif self.plasticity == "lazy":
            self.update_synapses(t, np.concatenate([spikes, due_ids, self.expiring.ids]))
        self.receive_spikes(due_ids)
        if self.instrumented:
            self._check(t, spikes)
        for tap in self.taps:
            tap(t, spikes)
        self.t = t + 1
        return spikes

    def run(self, steps: int, flush: bool = True) -> float:
        """Run ``steps`` steps; returns wall-clock seconds spent."""
        t0 = time.perf_counter()
        for _ in range(steps):
            self.step()
        if flush:
            self.flush()
        return time.perf_counter() - t0

    def flush(self) -> None:
        """Bring every synapse up to date with the last completed step."""
        if self.plasticity and self.t > 0:
            stale = np.flatnonzero(self.ages < self.t)
            if len(stale):
                self.update_synapses(self.t - 1, stale)

    def _check(self, t: int, spikes: np.ndarray) -> None:
        if len(np.unique(spikes)) != len(spikes):
            raise InvariantViolation(f"neuron spiked twice in step {t}")
        if self.ring.bits is not None and self.ring.popcount(t) != len(spikes):
            raise InvariantViolation(f"bitmask and queue disagree at step {t}")
        if self.ages is not None and np.any(t + 1 - self.ages > self.max_lag):
            raise InvariantViolation(f"stale synapses beyond retained history at step {t}")

    # -- reporting -----------------------------------------------------------

    def memory(self) -> dict[str, dict[str, int]]:
        """Bytes actually allocated, by category."""
        neuron = {"fields": self.neurons.nbytes, **self.ring.nbytes,
                  "ages": 0 if self.ages is None else self.ages.nbytes,
                  "expirations": 0 if self.expiring is None else self.expiring.entries.nbytes,
                  "rng": 0 if self._streams is None else self._streams.states.nbytes}
        synapse = {"adjacency list": self.adjacency.nbytes, "fields": self.synapses.nbytes}
        return {"neuron": neuron, "synapse": synapse}

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
