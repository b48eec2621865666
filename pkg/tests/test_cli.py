import io

import pytest

from wqsnn.analysis import SpikeRaster, read_stats
from wqsnn.cli import ConfigError, RunConfig, main, neurons_for_synapses, run, sweep


def test_pingpong_run(tmp_path):
    raster, stats = tmp_path / "r.txt", tmp_path / "s.txt"
    assert main(["--model", "pingpong", "--duration", "1", "--raster", str(raster),
                 "--stats", str(stats), "--deterministic"]) == 0
    s = read_stats(stats)
    assert s["steps"] == "1000"
    r = SpikeRaster.read(raster)
    assert all((t % 2 == 0) == (i < 100) for t, i in zip(r.steps, r.neurons))


def test_stats_content(tmp_path):
    stats = tmp_path / "s.txt"
    assert main(["--model", "vogels", "--neurons", "4000", "--duration", "0.05",
                 "--stats", str(stats)]) == 0
    s = read_stats(stats)
    assert float(s["scaling_constant"]) == 1.0
    assert float(s["mem_neuron_total_B"]) == 48.0
    for key in ("firing_rate", "setup_construct_s", "setup_init_neurons_s", "setup_init_synapses_s",
                "sim_s", "steps_per_s", "seed"):
        assert key in s


def test_deterministic_rasters_identical(tmp_path):
    paths = [tmp_path / "a.txt", tmp_path / "b.txt"]
    for p in paths:
        assert main(["--model", "brunel", "--neurons", "1000", "--duration", "0.05", "--seed", "3",
                     "--deterministic", "--raster", str(p), "--stats", str(tmp_path / "s")]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_param_override_and_unknown_key(tmp_path, capsys):
    assert main(["--model", "brunel", "--neurons", "500", "--duration", "0.01",
                 "--param", "w_exc=0.2", "--stats", str(tmp_path / "s")]) == 0
    assert main(["--model", "brunel", "--neurons", "500", "--duration", "0.01",
                 "--param", "bogus=1", "--stats", str(tmp_path / "s")]) == 1
    assert "bogus" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit):
        main(["--model", "vogels", "--neurons", "10", "--synapses", "100"])
    with pytest.raises(SystemExit):
        main(["--model", "nope"])
    assert main(["--model", "vogels", "--neurons", "100", "--stats", "/nonexistent/dir/s.txt"]) == 1
    assert main(["--model", "brunel", "--neurons", "2", "--duration", "0.01"]) == 1


def test_synapse_target_solves_size():
    n = neurons_for_synapses("brunel", 100_000)
    assert n == 1414 or abs(n - 1414) <= 1
    with pytest.raises(ConfigError):
        neurons_for_synapses("pingpong", 10)


def test_run_config_defaults():
    cfg = RunConfig(model="vogels")
    assert cfg.neurons == 4000
    with pytest.raises(ConfigError):
        RunConfig(model="vogels", neurons=10, synapses=10)
    with pytest.raises(ConfigError):
        RunConfig(model="vogels", duration=0)


def test_descriptor_file(tmp_path):
    net = tmp_path / "net.cfg"
    net.write_text("populations = 100, 100\nconnect = 0 1 0.05\nconnect = 1 0 0.05\ndt = 1\ndelay = 2\n")
    stats = tmp_path / "s"
    assert main(["--model", "pingpong", "--config", str(net), "--duration", "0.02",
                 "--stats", str(stats)]) == 0
    assert read_stats(stats)["delay_steps"] == "2"


def test_sweep_rows():
    out = io.StringIO()
    cfg = RunConfig(model="brunel", duration=0.02)
    rows = sweep(cfg, [100_000, 200_000, 400_000], out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "synapses,setup_s,sim_s,bytes"
    assert len(lines) == 4 and len(rows) == 3
    assert [r["synapses"] for r in rows] == sorted(r["synapses"] for r in rows)


def test_sweep_needs_two_sizes():
    with pytest.raises(ConfigError):
        sweep(RunConfig(model="brunel"), [1000])
    assert main(["--model", "brunel", "--sweep", "100000"]) == 1


def test_sweep_flushes_partial_output(tmp_path, monkeypatch):
    import wqsnn.cli as cli
    from wqsnn.engine import InvariantViolation

    real = cli.run
    calls = []

    def flaky(cfg):
        calls.append(cfg)
        if len(calls) == 2:
            raise InvariantViolation("injected")
        return real(cfg)

    monkeypatch.setattr(cli, "run", flaky)
    csv = tmp_path / "out.csv"
    assert main(["--model", "brunel", "--duration", "0.01", "--sweep", "100000,200000,400000",
                 "--csv", str(csv)]) == 1
    lines = csv.read_text().splitlines()
    assert len(lines) == 2 and len(calls) == 2
