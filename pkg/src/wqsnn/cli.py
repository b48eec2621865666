"""Command-line front end: run a model, record its raster, report timing and memory."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import (MODEL_KINDS, Recorder, firing_rate, memory_estimate, scaling_constant,
                       write_stats)
from .engine import InvariantViolation, Simulation
from .models.bench import build_model, stimulus_range
from .models.params import load_params, parse_overrides
from .network import DescriptorError, load_descriptor

log = logging.getLogger("wqsnn")

ORIGINAL_SIZES = {"vogels": 4000, "brunel": 20000, "brunel+": 20000}
MODEL_NAMES = ("pingpong",) + MODEL_KINDS
WARMUP_MS = 500.0


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str
    neurons: int | None = None
    synapses: int | None = None
    duration: float = 1.0  # simulated seconds
    dt: float | None = None
    delay: int | None = None
    seed: int = 0
    threads: int = 1
    deterministic: bool = False
    plasticity: str = "lazy"
    instrumented: bool = False
    raster: str | None = None
    stats: str | None = None
    config: str | None = None
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; choose from {', '.join(MODEL_NAMES)}")
        if not self.duration > 0:
            raise ConfigError("duration must be positive")
        if self.neurons is not None and self.synapses is not None:
            raise ConfigError("give either --neurons or --synapses, not both")
        if self.model != "pingpong" and self.neurons is None and self.synapses is None:
            self.neurons = ORIGINAL_SIZES[self.model]
        for path in (self.raster, self.stats):
            if path and path != "-":
                parent = Path(path).resolve().parent
                if not parent.is_dir() or not os.access(parent, os.W_OK):
                    raise ConfigError(f"cannot write to {path}")

    def overrides(self) -> dict[str, float]:
        out = dict(self.params)
        if self.dt is not None:
            out["dt"] = self.dt
        if self.delay is not None:
            out["delay"] = self.delay
        return out


def neurons_for_synapses(model: str, synapses: int, overrides: dict[str, float] | None = None) -> int:
    """Network size whose expected synapse count is closest to ``synapses``."""
    if model == "pingpong":
        raise ConfigError("pingpong has a fixed size")
    ref = ORIGINAL_SIZES[model]
    per_n2 = build_model(model, ref, overrides)[0].expected_synapses() / ref**2
    guess = max(1, int(round(math.sqrt(synapses / per_n2))))
    best, best_err = None, math.inf
    for n in range(max(1, guess - 3), guess + 4):
        try:
            err = abs(build_model(model, n, overrides)[0].expected_synapses() - synapses)
        except ValueError:
            continue
        if err < best_err:
            best, best_err = n, err
    if best is None:
        raise ConfigError(f"no network size of {model} yields {synapses} synapses")
    return best


def build(cfg: RunConfig):
    overrides = cfg.overrides()
    if cfg.model == "pingpong":
        desc, model = build_model("pingpong")
        if cfg.dt is not None or cfg.delay is not None:
            desc = dataclasses.replace(desc, dt=cfg.dt or desc.dt, delay=cfg.delay or desc.delay)
    else:
        n = cfg.neurons if cfg.neurons is not None else neurons_for_synapses(cfg.model, cfg.synapses, overrides)
        try:
            desc, model = build_model(cfg.model, n, overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.config:
        user = load_descriptor(cfg.config)
        if user.num_neurons != desc.num_neurons:
            raise ConfigError(f"{cfg.config}: {user.num_neurons} neurons, model expects {desc.num_neurons}")
        desc = user
    return desc, model


def run(cfg: RunConfig) -> dict:
    """Build, simulate and report; returns the stats written."""
    desc, model = build(cfg)
    steps = int(round(cfg.duration * 1000.0 / desc.dt))
    log.info("building %s: %d neurons", cfg.model, desc.num_neurons)
    t0 = time.perf_counter()
    sim = Simulation(desc, model, cfg.seed, plasticity=cfg.plasticity, threads=cfg.threads,
                     deterministic=cfg.deterministic, instrumented=cfg.instrumented)
    setup_s = time.perf_counter() - t0
    rec = Recorder(desc.dt, desc.num_neurons)
    sim.taps.append(rec)
    try:
        log.info("simulating %d steps", steps)
        sim_s = sim.run(steps)
    finally:
        sim.close()
    raster = rec.raster()

    warmup = int(round(WARMUP_MS / desc.dt)) if steps * desc.dt > 2 * WARMUP_MS else 0
    stim = stimulus_range(model)
    measured = raster.select(warmup, None, stim)
    n_rate = desc.num_neurons - len(stim)
    rate = firing_rate(measured, n_rate, steps - warmup)

    stats = {
        "model": cfg.model,
        "seed": cfg.seed,
        "neurons": desc.num_neurons,
        "synapses": sim.adjacency.num_synapses,
        "deg_max": sim.adjacency.deg_max,
        "dt_ms": desc.dt,
        "delay_steps": desc.delay,
        "steps": steps,
        "deterministic": int(sim.deterministic),
        "threads": cfg.threads,
        "setup_construct_s": f"{sim.timings['construct']:.6f}",
        "setup_init_neurons_s": f"{sim.timings['init_neurons']:.6f}",
        "setup_init_synapses_s": f"{sim.timings['init_synapses']:.6f}",
        "setup_s": f"{setup_s:.6f}",
        "sim_s": f"{sim_s:.6f}",
        "steps_per_s": f"{steps / sim_s:.3f}" if sim_s > 0 else "inf",
        "warmup_steps": warmup,
        "spikes": len(raster),
        "firing_rate": repr(rate),
        "firing_rate_hz": repr(rate / desc.dt * 1000.0),
    }
    if cfg.model in MODEL_KINDS:
        stats["scaling_constant"] = repr(scaling_constant(cfg.model, desc.num_neurons))
        est = memory_estimate(cfg.model, desc.num_neurons, sim.adjacency.num_synapses, sim)
        for k, v in est.per_neuron.items():
            stats[f"mem_neuron_{k.replace(' ', '_')}_B"] = v
        stats["mem_neuron_total_B"] = est.neuron_total
        for k, v in est.per_synapse.items():
            stats[f"mem_synapse_{k.replace(' ', '_')}_B"] = v
        stats["mem_synapse_total_B"] = est.synapse_total
        stats["mem_estimate_bytes"] = int(est.total_bytes)
    actual = sim.memory()
    stats["mem_actual_bytes"] = sum(sum(p.values()) for p in actual.values())
    if cfg.plasticity and model.plastic:
        stats["plasticity"] = cfg.plasticity
        stats["synapse_updates"] = sim.synapse_updates

    if cfg.raster:
        if cfg.raster == "-":
            sys.stdout.write(raster.to_text())
        else:
            raster.write(cfg.raster)
    write_stats(stats, cfg.stats)
    return stats


def sweep(cfg: RunConfig, sizes: list[int], out=None) -> list[dict]:
    """One run per synapse count; rows are flushed to ``out`` as they finish."""
    if len(sizes) < 2:
        raise ConfigError("a sweep needs at least two sizes")
    if cfg.model == "pingpong":
        raise ConfigError("pingpong has a fixed size and cannot be swept")
    out = out or sys.stdout
    out.write("synapses,setup_s,sim_s,bytes\n")
    out.flush()
    rows = []
    for s in sizes:
        one = dataclasses.replace(cfg, neurons=None, synapses=int(s), raster=None, stats=os.devnull)
        stats = run(one)
        row = {"synapses": stats["synapses"], "setup_s": stats["setup_s"], "sim_s": stats["sim_s"],
               "bytes": stats["mem_estimate_bytes"]}
        out.write(f"{row['synapses']},{row['setup_s']},{row['sim_s']},{row['bytes']}\n")
        out.flush()
        rows.append(row)
    return rows


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wqsnn", description=__doc__)
    p.add_argument("--model", required=True, choices=MODEL_NAMES)
    size = p.add_mutually_exclusive_group()
    size.add_argument("--neurons", type=int, help="network size |N|")
    size.add_argument("--synapses", type=float, help="target synapse count; |N| is solved for")
    p.add_argument("--duration", type=float, default=1.0, help="simulated seconds (default 1)")
    p.add_argument("--dt", type=float, help="timestep in ms (model default otherwise)")
    p.add_argument("--delay", type=int, help="synaptic delay in steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--deterministic", action="store_true",
                   help="sequential stages in id order; bit-reproducible")
    p.add_argument("--plasticity", choices=("lazy", "eager"), default="lazy")
    p.add_argument("--instrumented", action="store_true", help="check engine invariants every step")
    p.add_argument("--config", help="network descriptor file overriding the model topology")
    p.add_argument("--raster", metavar="PATH", help="write the spike raster ('-' for stdout)")
    p.add_argument("--stats", metavar="PATH", help="write key=value stats (default stdout)")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="override a model parameter (repeatable)")
    p.add_argument("--sweep", metavar="S1,S2,...", help="synapse counts to sweep; CSV to --csv")
    p.add_argument("--csv", metavar="PATH", help="sweep output (default stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.model != "pingpong":
            load_params(args.model, parse_overrides(args.param))  # reject unknown keys early
        cfg = RunConfig(
            model=args.model, neurons=args.neurons,
            synapses=int(args.synapses) if args.synapses is not None else None,
            duration=args.duration, dt=args.dt, delay=args.delay, seed=args.seed,
            threads=args.threads, deterministic=args.deterministic, plasticity=args.plasticity,
            instrumented=args.instrumented, raster=args.raster, stats=args.stats,
            config=args.config, params=parse_overrides(args.param))
        if args.sweep:
            sizes = [int(float(s)) for s in args.sweep.split(",") if s.strip()]
            if args.csv:
                with open(args.csv, "w") as fh:
                    sweep(cfg, sizes, fh)
            else:
                sweep(cfg, sizes)
        else:
            run(cfg)
    except (ConfigError, DescriptorError, KeyError, ValueError, OSError, InvariantViolation) as exc:
        print(f"wqsnn: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
