"""Benchmark networks: ping-pong, Vogels-Abbott, Brunel and Brunel with STDP."""

from __future__ import annotations

import numpy as np

from ..analysis import scaling_constant
from ..network import NetworkDescriptor
from .base import Model
from .lif import LifModel, LifParams, check_poisson, lif_step, poisson_update
from .params import load_params
from .stdp import StdpParams, stdp_synapse_update


class PingPong(Model):
    """Two populations taking turns: a flagged neuron spikes once and clears its flag."""

    neuron_fields = [("flag", np.bool_)]

    def __init__(self, first: int = 100):
        self.first = first

    def init(self, n):
        n.flag = n.id < self.first

    def update(self, n, dt):
        spike = np.array(n.flag, dtype=bool)
        n.flag = False
        return spike

    def receive(self, src, dst, syn=None):
        dst.flag = True


def build_pingpong(size: int = 100, p: float = 0.01):
    desc = NetworkDescriptor.create([size, size], [(0, 1, p), (1, 0, p)], dt=1, delay=1)
    return desc, PingPong(size)


class Vogels(Model):
    """Current-based Vogels-Abbott network, fields ``V``, ``ge``, ``gi``, ``refractory``.

    A constant background drive makes every neuron fire on its own; recurrent
    excitation and inhibition arrive as exponentially decaying currents.
    """

    neuron_fields = [("V", np.float32), ("ge", np.float32), ("gi", np.float32),
                     ("refractory", np.int32)]

    def __init__(self, n_exc: int, params: dict[str, float], scale: float):
        self.n_exc = n_exc
        self.params = params
        self.lif = LifParams.from_dict(params)
        self.scale = scale
        self.w_exc = np.float32(scale * params["w_exc"])
        self.w_inh = np.float32(scale * params["w_inh"])

    def init(self, n):
        p = self.lif
        n.V = p.v_reset + n.uniform() * (p.v_threshold - p.v_reset)

    def update(self, n, dt):
        p = self.params
        ge, gi = n.ge, n.gi
        inp = dt * (ge + gi) / p["tau_m"]
        v, ref, spike = lif_step(n.V, inp, n.refractory, self.lif, dt)
        n.V = v
        n.refractory = ref
        n.ge = ge * np.float32(np.exp(-dt / p["tau_exc"]))
        n.gi = gi * np.float32(np.exp(-dt / p["tau_inh"]))
        return spike

    def receive(self, src, dst, syn=None):
        exc = src.id < self.n_exc
        if exc.all():
            dst.add("ge", np.full(len(dst), self.w_exc))
        elif not exc.any():
            dst.add("gi", np.full(len(dst), self.w_inh))
        else:
            e, i = np.flatnonzero(exc), np.flatnonzero(~exc)
            dst[e].add("ge", np.full(len(e), self.w_exc))
            dst[i].add("gi", np.full(len(i), self.w_inh))


def vogels_sizes(n: int, params: dict[str, float]) -> tuple[int, int]:
    n_exc = int(round(n * params["excitatory_fraction"]))
    if n_exc < 1 or n - n_exc < 1:
        raise ValueError(f"{n} neurons are too few to split into excitatory/inhibitory populations")
    return n_exc, n - n_exc


def build_vogels(n: int = 4000, overrides: dict[str, float] | None = None):
    params = load_params("vogels", overrides)
    n_exc, n_inh = vogels_sizes(n, params)
    p = params["p"]
    desc = NetworkDescriptor.create([n_exc, n_inh], [(0, 0, p), (0, 1, p), (1, 0, p), (1, 1, p)],
                                    dt=params["dt"], delay=int(params["delay"]))
    return desc, Vogels(n_exc, params, scaling_constant("vogels", n))


class Brunel(LifModel):
    """Sparse excitatory/inhibitory LIF network driven by a Poisson population.

    Ids ``[0, n_poisson)`` are Poisson sources; they reuse the LIF layout but
    their update is specialised, everything else defers to the LIF block.
    """

    def __init__(self, n_poisson: int, n_exc: int, params: dict[str, float], scale: float):
        super().__init__(LifParams.from_dict(params), scale)
        self.n_poisson = n_poisson
        self.n_exc = n_exc
        self.params = params
        self.rate = params["poisson_rate"]
        check_poisson(self.rate, params["dt"])
        # per source population: poisson, excitatory, inhibitory
        self._bounds = np.array([n_poisson, n_poisson + n_exc])
        self._weights = np.array([params["w_poisson"], params["w_exc"], params["w_inh"]], dtype=np.float32)
        self._by_source: np.ndarray | None = None

    @property
    def stimulus(self) -> range:
        return range(0, self.n_poisson)

    def init(self, n):
        p = self.lif
        n.V = p.v_rest + n.uniform() * (p.v_threshold - p.v_rest)
        self._by_source = self._weights[np.searchsorted(self._bounds, n.id, side="right")]

    def update(self, n, dt):
        ids = n.id if not isinstance(n._index, slice) else None
        if ids is None:
            k = min(max(self.n_poisson - n._index.start, 0), len(n))
        else:
            k = int(np.searchsorted(ids, self.n_poisson))
        if k == 0:
            return super().update(n, dt)
        spikes = np.empty(len(n), dtype=bool)
        spikes[:k] = poisson_update(n[:k], self.rate, dt)
        if k < len(n):
            spikes[k:] = super().update(n[k:], dt)
        return spikes

    def source_weight(self, src_ids: np.ndarray) -> np.ndarray:
        if self._by_source is not None:
            return self._by_source[src_ids]
        return self._weights[np.searchsorted(self._bounds, src_ids, side="right")]

    def weight(self, src, syn=None):
        return self.source_weight(src.id)


def brunel_sizes(n: int, params: dict[str, float]) -> tuple[int, int, int]:
    n_p = int(round(n * params["poisson_fraction"]))
    n_e = int(round(n * params["excitatory_fraction"]))
    n_i = n - n_p - n_e
    if min(n_p, n_e, n_i) < 1:
        raise ValueError(f"{n} neurons are too few to split into poisson/excitatory/inhibitory populations")
    return n_p, n_e, n_i


def _brunel_desc(n: int, params):
    n_p, n_e, n_i = brunel_sizes(n, params)
    p = params["p"]
    desc = NetworkDescriptor.create(
        [n_p, n_e, n_i],
        [(0, 1, p), (0, 2, p), (1, 1, p), (1, 2, p), (2, 1, p), (2, 2, p)],
        dt=params["dt"], delay=int(params["delay"]))
    return desc, n_p, n_e


def build_brunel(n: int = 20000, overrides: dict[str, float] | None = None):
    params = load_params("brunel", overrides)
    desc, n_p, n_e = _brunel_desc(n, params)
    return desc, Brunel(n_p, n_e, params, scaling_constant("brunel", n))


class BrunelPlus(Brunel):
    """Brunel with plastic excitatory synapses (``weight``, ``pre_trace``, ``post_trace``)."""

    synapse_fields = [("weight", np.float32), ("pre_trace", np.float32), ("post_trace", np.float32)]

    def __init__(self, n_poisson, n_exc, params, scale):
        super().__init__(n_poisson, n_exc, params, scale)
        self.stdp = StdpParams.from_dict(params)

    def synapse_init(self, syn):
        syn.weight = self.source_weight(syn.src)

    def _plastic(self, src: np.ndarray) -> np.ndarray:
        return (src >= self.n_poisson) & (src < self.n_poisson + self.n_exc)

    def synapse_update(self, syn, pre, post, dt):
        plastic = self._plastic(syn.src)
        if plastic.any():
            stdp_synapse_update(syn, pre, post, self.stdp, dt, mask=plastic)

    def weight(self, src, syn=None):
        return syn.weight


def build_brunel_plus(n: int = 20000, overrides: dict[str, float] | None = None):
    params = load_params("brunel+", overrides)
    desc, n_p, n_e = _brunel_desc(n, params)
    return desc, BrunelPlus(n_p, n_e, params, scaling_constant("brunel+", n))


BUILDERS = {
    "vogels": build_vogels,
    "brunel": build_brunel,
    "brunel+": build_brunel_plus,
}


def build_model(kind: str, n: int | None = None, overrides: dict[str, float] | None = None):
    """``(descriptor, model)`` for a named model; ``pingpong`` ignores ``n`` and overrides."""
    if kind == "pingpong":
        return build_pingpong()
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown model {kind!r}; choose from pingpong, {', '.join(BUILDERS)}") from None
    return builder(n, overrides) if n is not None else builder(overrides=overrides)


def stimulus_range(model: Model) -> range:
    """Ids of stimulus-only neurons that rate statistics leave out."""
    return getattr(model, "stimulus", range(0))
