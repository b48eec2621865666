import numpy as np
import pytest

from wqsnn.analysis import (SpikeRaster, firing_rate, memory_estimate, rate_retention, read_stats,
                            scaling_constant, write_stats)
from wqsnn.engine import Simulation
from wqsnn.models import build_model
from wqsnn.analysis import Recorder


@pytest.mark.parametrize("kind,n,c", [
    ("vogels", 4000, 1.0), ("brunel", 20000, 1.0), ("vogels", 40000, 0.01), ("brunel+", 10000, 2.0)])
def test_scaling_constant(kind, n, c):
    assert scaling_constant(kind, n) == pytest.approx(c, rel=1e-15)


def test_scaling_constant_errors():
    with pytest.raises(ValueError):
        scaling_constant("vogels", 0)
    with pytest.raises(ValueError):
        scaling_constant("other", 10)


def test_firing_rate_extremes():
    empty = SpikeRaster([], [])
    assert firing_rate(empty, 10, 5) == 0
    steps, ids = np.meshgrid(np.arange(5), np.arange(10), indexing="ij")
    full = SpikeRaster(steps.ravel(), ids.ravel())
    assert firing_rate(full, 10, 5) == 1


def test_firing_rate_pingpong_hand_count():
    desc, model = build_model("pingpong")
    sim = Simulation(desc, model, 4)
    rec = Recorder()
    sim.taps.append(rec)
    counts = [len(sim.step()) for _ in range(10)]
    assert firing_rate(rec.raster(), 200, 10) == sum(counts) / 2000


def test_rate_retention_bands():
    assert rate_retention("vogels", 5.0, 5.0)
    assert not rate_retention("vogels", 12.5, 5.0)
    assert rate_retention("vogels", 2.5, 5.0)
    assert rate_retention("brunel", 1.2, 1.0)
    assert not rate_retention("brunel", 1.3, 1.0)
    assert not rate_retention("brunel+", 0.7, 1.0)


def test_memory_table():
    expected = {"vogels": (48, 4), "brunel": (68, 4), "brunel+": (82.25, 16)}
    for kind, (per_n, per_s) in expected.items():
        m = memory_estimate(kind, 1000, 5000)
        assert m.neuron_total == per_n
        assert m.synapse_total == per_s
        assert m.total_bytes == per_n * 1000 + per_s * 5000


def test_memory_breakdown_brunel_plus():
    m = memory_estimate("brunel+")
    assert m.per_neuron == {"fields": 8, "spikes": 60, "bitmasks": 6.25, "ages": 4, "expirations": 4}
    assert m.per_synapse == {"adjacency list": 4, "fields": 12}
    # 6.25 bytes of bitmask per neuron is one bit for each of 50 retained steps
    assert m.per_neuron["bitmasks"] * 8 == 50


def test_memory_empty_network():
    m = memory_estimate("vogels", 0, 0)
    assert m.total_bytes == 0


def test_memory_with_simulation_attaches_actual():
    desc, model = build_model("brunel+", 400)
    sim = Simulation(desc, model)
    m = memory_estimate("brunel+", 400, sim.adjacency.num_synapses, sim)
    assert m.actual_bytes > 0
    assert m.actual["neuron"]["bitmasks"] == 50 * 50


def test_raster_roundtrip(tmp_path):
    r = SpikeRaster([3, 1, 1, 0], [5, 9, 2, 7], dt=0.1, num_neurons=10)
    assert list(r.steps) == [0, 1, 1, 3] and list(r.neurons) == [7, 2, 9, 5]
    r.write(tmp_path / "r.txt")
    assert SpikeRaster.read(tmp_path / "r.txt") == r
    empty = SpikeRaster([], [], 1.0, 3)
    empty.write(tmp_path / "e.txt")
    assert SpikeRaster.read(tmp_path / "e.txt") == empty


def test_raster_select():
    r = SpikeRaster([0, 1, 2, 3], [0, 5, 1, 6], num_neurons=8)
    s = r.select(1, 3, exclude=range(0, 2))
    assert list(s.steps) == [1] and list(s.neurons) == [5]
    assert list(r.counts_per_step(5)) == [1, 1, 1, 1, 0]


def test_stats_roundtrip(tmp_path):
    write_stats({"a": 1, "b": "x=y"}, tmp_path / "s.txt")
    assert read_stats(tmp_path / "s.txt") == {"a": "1", "b": "x=y"}
