import math

import numpy as np
import pytest

from wqsnn.analysis import Recorder
from wqsnn.engine import Simulation
from wqsnn.models import FieldStore, LifParams, NeuronView, StdpParams, build_model
from wqsnn.models.lif import LifModel, lif_receive, lif_update, poisson_update
from wqsnn.models.params import load_params, parse_overrides
from wqsnn.models.stdp import stdp_step
from wqsnn.rng import XorshiftLanes

P = LifParams(tau_m=20, v_rest=0, v_reset=10, v_threshold=20, refractory=2, background=0)


def lif_view(v, i=0.0, ref=0):
    store = FieldStore(LifModel.neuron_fields, len(v))
    store["V"][:] = v
    store["I"][:] = i
    store["refractory"][:] = ref
    return NeuronView(store, slice(0, len(v)))


def test_lif_fixed_point():
    n = lif_view([0.0])
    assert not lif_update(n, P, 1.0)[0]
    assert n.V[0] == 0.0


def test_lif_leak():
    n = lif_view([10.0])
    assert not lif_update(n, P, 1.0)[0]
    assert n.V[0] == pytest.approx(9.5)


def test_lif_threshold_reached_exactly():
    n = lif_view([0.0], i=20.0)
    assert lif_update(n, P, 1.0)[0]
    assert n.V[0] == P.v_reset
    assert n.refractory[0] == 2
    assert n.I[0] == 0


def test_lif_refractory_holds_reset():
    n = lif_view([10.0], i=50.0, ref=2)
    assert not lif_update(n, P, 1.0)[0]
    assert n.V[0] == P.v_reset and n.refractory[0] == 1


def test_lif_param_validation():
    with pytest.raises(ValueError):
        LifParams(tau_m=0)
    with pytest.raises(ValueError):
        LifParams(v_reset=20, v_threshold=20)


def test_lif_receive():
    n = lif_view([0.0, 0.0])
    lif_receive(n[np.array([0])], 0.1, 1.0)
    assert n.I[0] == pytest.approx(0.1)
    lif_receive(n[np.array([1])], 0.1, 0.0)
    assert n.I[1] == 0


def test_lif_receive_repeated_targets_sum():
    n = lif_view([0.0])
    lif_receive(n[np.array([0, 0])], np.array([0.1, 0.2]), 1.0)
    assert n.I[0] == pytest.approx(0.3, abs=1e-7)


def poisson_view(count, seed=1):
    store = FieldStore(LifModel.neuron_fields, count)
    lanes = XorshiftLanes.seeded(seed, count)
    return NeuronView(store, slice(0, count), lambda: lanes)


def test_poisson_extremes():
    n = poisson_view(100)
    assert not poisson_update(n, 0.0, 1.0).any()
    assert poisson_update(n, 1.0, 1.0).all()


def test_poisson_rate():
    n = poisson_view(1000)
    spikes = sum(int(poisson_update(n, 0.02, 1.0).sum()) for _ in range(1000))
    sigma = math.sqrt(1e6 * 0.02 * 0.98)
    assert abs(spikes - 0.02 * 1e6) < 4 * sigma


def stdp(w, x, y, pre, post, p, dt=1.0):
    arr = lambda v: np.array([v], dtype=np.float32)
    out = stdp_step(arr(w), arr(x), arr(y), np.array([pre]), np.array([post]), p, dt)
    return [float(a[0]) for a in out]


def test_stdp_quiescent():
    p = StdpParams()
    assert stdp(0.5, 0, 0, False, False, p) == [0.5, 0, 0]


def test_stdp_potentiation_example():
    p = StdpParams(a_plus=0.01, a_minus=0.012, tau_plus=20, tau_minus=20, w_min=0, w_max=1)
    w, x, y = stdp(0.5, 0, 0, True, False, p)
    for _ in range(4):
        w, x, y = stdp(w, x, y, False, False, p)
    w, x, y = stdp(w, x, y, False, True, p)
    assert w == pytest.approx(0.5 + 0.01 * math.exp(-5 / 20), rel=1e-6)


def test_stdp_depression_and_clamps():
    p = StdpParams(a_plus=0.5, a_minus=0.5, w_min=0.1, w_max=0.6)
    w, _, _ = stdp(0.6, 1.0, 0, False, True, p)
    assert w == pytest.approx(0.6)
    w, _, _ = stdp(0.2, 0, 1.0, True, False, p)
    assert w == pytest.approx(0.1)
    with pytest.raises(ValueError):
        StdpParams(w_min=0.5, w_max=0.5)


@pytest.mark.parametrize("kind,n,c", [
    ("vogels", 4000, 1.0), ("brunel", 20000, 1.0), ("vogels", 8000, 0.25), ("brunel+", 40000, 0.5)])
def test_builders_scaling(kind, n, c):
    desc, model = build_model(kind, n)
    assert desc.num_neurons == n
    assert model.scale == c


def test_builder_shapes():
    desc, model = build_model("brunel+", 1000)
    assert [p.size for p in desc.populations] == [500, 400, 100]
    assert model.plastic and model.has_synapse_state
    assert sum(np.dtype(t).itemsize for _, t in model.synapse_fields) == 12
    desc, model = build_model("vogels", 1000)
    assert [p.size for p in desc.populations] == [800, 200]
    assert not model.plastic
    with pytest.raises(ValueError):
        build_model("hodgkin")


def test_pingpong_alternates():
    desc, model = build_model("pingpong")
    sim = Simulation(desc, model, 0)
    rec = Recorder()
    sim.taps.append(rec)
    sim.run(30)
    r = rec.raster()
    assert np.all(r.steps[r.neurons < 100] % 2 == 0)
    assert np.all(r.steps[r.neurons >= 100] % 2 == 1)
    assert np.sum(r.steps == 0) == 100


def test_params_overrides():
    p = load_params("brunel", {"w_exc": 0.2})
    assert p["w_exc"] == 0.2 and p["delay"] == 15
    with pytest.raises(KeyError):
        load_params("brunel", {"nonsense": 1})
    with pytest.raises(KeyError):
        load_params("nonexistent")
    assert parse_overrides(["a=1", "b = 2.5"]) == {"a": 1.0, "b": 2.5}
    with pytest.raises(ValueError):
        parse_overrides(["novalue"])
