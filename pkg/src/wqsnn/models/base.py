"""Model interface: field layouts, batch views and the callback contract.

A model declares its per-neuron (and optionally per-synapse) fields and
implements callbacks. Callbacks receive *views*: a view addresses a batch of
neurons or synapses and exposes each declared field as an attribute, so one
call processes a whole work item batch::

    class PingPong(Model):
        neuron_fields = [("flag", np.bool_)]

        def init(self, n):
            n.flag = n.id < 100

        def update(self, n, dt):
            spike = n.flag.copy()
            n.flag = False
            return spike

        def receive(self, src, dst, syn=None):
            dst.flag = True

Assignment through a view scatters into the store, which is only safe for
idempotent writes when a target id repeats within one batch. Use
``dst.add(field, values)`` for anything that accumulates.
"""

from __future__ import annotations

import threading
from typing import Sequence

import numpy as np

FieldLayout = Sequence[tuple[str, "np.typing.DTypeLike"]]


class FieldStore:
    """Structure of arrays: one contiguous array per declared field."""

    def __init__(self, layout: FieldLayout, size: int):
        self.layout = tuple((name, np.dtype(dtype)) for name, dtype in layout)
        self.size = size
        self.fields = {name: np.zeros(size, dtype=dtype) for name, dtype in self.layout}
        self._lock: threading.Lock | None = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.fields[name]

    def __contains__(self, name: str) -> bool:
        return name in self.fields

    @property
    def bytes_per_item(self) -> int:
        return sum(dt.itemsize for _, dt in self.layout)

    @property
    def nbytes(self) -> int:
        return sum(a.nbytes for a in self.fields.values())

    def set_concurrent(self, on: bool) -> None:
        self._lock = threading.Lock() if on else None

    def accumulate(self, name: str, index, values) -> None:
        """``field[index] += values`` with repeated indices all applied."""
        arr = self.fields[name]
        if self._lock is None:
            np.add.at(arr, index, values)
        else:
            with self._lock:
                np.add.at(arr, index, values)

    def snapshot(self) -> dict[str, np.ndarray]:
        return {k: v.copy() for k, v in self.fields.items()}


class NeuronView:
    """A batch of neurons: a contiguous id range or an explicit id array."""

    __slots__ = ("_store", "_index", "_streams")

    def __init__(self, store: FieldStore, index, streams=None):
        object.__setattr__(self, "_store", store)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_streams", streams)

    @property
    def id(self) -> np.ndarray:
        idx = self._index
        if isinstance(idx, slice):
            return np.arange(idx.start, idx.stop, dtype=np.int64)
        return np.asarray(idx)

    def __len__(self) -> int:
        idx = self._index
        return idx.stop - idx.start if isinstance(idx, slice) else len(idx)

    def __getattr__(self, name):
        try:
            arr = self._store.fields[name]
        except KeyError:
            raise AttributeError(name) from None
        return arr[self._index]

    def __setattr__(self, name, value):
        if name not in self._store.fields:
            raise AttributeError(f"no neuron field {name!r}")
        self._store.fields[name][self._index] = value

    def add(self, name: str, values) -> None:
        """Accumulate into a field; safe when ids repeat or batches run concurrently."""
        self._store.accumulate(name, self._index, values)

    def __getitem__(self, sel) -> "NeuronView":
        idx = self._index
        if isinstance(idx, slice) and isinstance(sel, slice):
            start, stop, step = sel.indices(idx.stop - idx.start)
            if step == 1:
                return NeuronView(self._store, slice(idx.start + start, idx.start + max(start, stop)),
                                  self._streams)
        return NeuronView(self._store, self.id[sel], self._streams)

    def uniform(self) -> np.ndarray:
        """One draw in (0, 1] from each neuron's private random stream."""
        if self._streams is None:
            raise RuntimeError("this view has no random streams attached")
        return self._streams().uniform(self._index)


class SynapseView:
    """A batch of synapses with their source and target neuron ids."""

    __slots__ = ("_fields", "_index", "src", "dst")

    def __init__(self, fields: dict[str, np.ndarray], index, src: np.ndarray, dst: np.ndarray):
        object.__setattr__(self, "_fields", fields)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "src", src)
        object.__setattr__(self, "dst", dst)

    def __len__(self) -> int:
        return len(self.src)

    def __getattr__(self, name):
        try:
            arr = self._fields[name]
        except KeyError:
            raise AttributeError(name) from None
        return arr[self._index]

    def __setattr__(self, name, value):
        if name not in self._fields:
            raise AttributeError(f"no synapse field {name!r}")
        self._fields[name][self._index] = value


class Model:
    """Base class for user models; override the callbacks you need.

    ``synapse_update(syn, pre, post, dt)`` is optional. Defining it turns on
    the plasticity path of the engine.
    """

    neuron_fields: FieldLayout = ()
    synapse_fields: FieldLayout = ()
    synapse_update = None

    def init(self, neurons: NeuronView) -> None:
        pass

    def update(self, neurons: NeuronView, dt: float) -> np.ndarray:
        return np.zeros(len(neurons), dtype=bool)

    def receive(self, src: NeuronView, dst: NeuronView, syn: SynapseView | None = None) -> None:
        pass

    def synapse_init(self, syn: SynapseView) -> None:
        pass

    @property
    def plastic(self) -> bool:
        return callable(getattr(self, "synapse_update", None))

    @property
    def has_synapse_state(self) -> bool:
        return bool(self.synapse_fields)
