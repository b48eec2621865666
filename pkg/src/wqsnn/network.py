"""Declarative network descriptions: populations, connectivity, timestep, delay."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable


class DescriptorError(ValueError):
    """Raised by :func:`validate`; ``problems`` lists every violation found."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class PopulationSpec:
    size: int


@dataclass(frozen=True)
class ConnectivitySpec:
    src: int
    dst: int
    p: float


@dataclass(frozen=True)
class NetworkDescriptor:
    populations: tuple[PopulationSpec, ...]
    connections: tuple[ConnectivitySpec, ...] = ()
    dt: float = 1.0  # simulated ms per step
    delay: int = 1  # whole steps
    _offsets: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pops = tuple(p if isinstance(p, PopulationSpec) else PopulationSpec(int(p))
                     for p in self.populations)
        conns = tuple(c if isinstance(c, ConnectivitySpec) else ConnectivitySpec(int(c[0]), int(c[1]), float(c[2]))
                      for c in self.connections)
        object.__setattr__(self, "populations", pops)
        object.__setattr__(self, "connections", conns)
        offsets = [0]
        for p in pops:
            offsets.append(offsets[-1] + max(p.size, 0))
        object.__setattr__(self, "_offsets", tuple(offsets))

    @classmethod
    def create(cls, sizes: Iterable[int], connections: Iterable[tuple[int, int, float]] = (),
               dt: float = 1.0, delay: int = 1) -> "NetworkDescriptor":
        """Mirror of the compact constructor form ``({100, 100}, {{0, 1, 0.01}}, dt, delay)``."""
        return cls(tuple(PopulationSpec(int(s)) for s in sizes),
                   tuple(ConnectivitySpec(int(a), int(b), float(p)) for a, b, p in connections),
                   float(dt), int(delay))

    @property
    def num_neurons(self) -> int:
        return self._offsets[-1]

    def expected_synapses(self) -> float:
        return sum(c.p * self.populations[c.src].size * self.populations[c.dst].size
                   for c in self.connections)


def validate(desc: NetworkDescriptor) -> NetworkDescriptor:
    """Return ``desc`` unchanged if it is well formed, else raise :class:`DescriptorError`."""
    problems = []
    if not desc.populations:
        problems.append("at least one population is required")
    for i, pop in enumerate(desc.populations):
        if pop.size < 1:
            problems.append(f"population {i} is empty (size {pop.size})")
    npop = len(desc.populations)
    seen = set()
    for c in desc.connections:
        for role, idx in (("source", c.src), ("target", c.dst)):
            if not 0 <= idx < npop:
                problems.append(f"connection {c.src}->{c.dst}: {role} population {idx} does not exist")
        if not 0.0 <= c.p <= 1.0:
            problems.append(f"connection {c.src}->{c.dst}: probability out of range ({c.p})")
        if (c.src, c.dst) in seen:
            problems.append(f"connection {c.src}->{c.dst} declared twice")
        seen.add((c.src, c.dst))
    if not desc.dt > 0:
        problems.append(f"dt must be > 0 (got {desc.dt})")
    if desc.delay < 1:
        problems.append(f"delay must be ≥ 1 (got {desc.delay})")
    if problems:
        raise DescriptorError(problems)
    return desc


def global_id_range(desc: NetworkDescriptor, pop: int) -> tuple[int, int]:
    """Half-open interval of global neuron ids belonging to population ``pop``."""
    if not 0 <= pop < len(desc.populations):
        raise IndexError(f"population {pop} does not exist")
    return desc._offsets[pop], desc._offsets[pop + 1]


_LINE = re.compile(r"^\s*([A-Za-z_]+)\s*[=:]\s*(.*?)\s*$")


def parse_descriptor(text: str) -> NetworkDescriptor:
    """Parse the line-oriented descriptor format.

    ::

        # two populations that excite each other
        populations = 100, 100
        connect = 0 1 0.01
        connect = 1 0 0.01
        dt = 1
        delay = 1

    Unknown keys are ignored so the same file can carry run settings.
    """
    sizes: list[int] = []
    conns: list[tuple[int, int, float]] = []
    dt, delay = 1.0, 1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise DescriptorError([f"line {lineno}: expected key = value"])
        key, value = m.group(1).lower(), m.group(2)
        try:
            if key == "populations":
                sizes = [int(v) for v in re.split(r"[,\s]+", value) if v]
            elif key == "connect":
                a, b, p = re.split(r"[,\s]+", value.strip())
                conns.append((int(a), int(b), float(p)))
            elif key == "dt":
                dt = float(value)
            elif key == "delay":
                delay = int(value)
        except ValueError as exc:
            raise DescriptorError([f"line {lineno}: {exc}"]) from None
    return NetworkDescriptor.create(sizes, conns, dt, delay)


def load_descriptor(path: str | Path) -> NetworkDescriptor:
    return validate(parse_descriptor(Path(path).read_text()))


def format_descriptor(desc: NetworkDescriptor) -> str:
    lines = ["populations = " + ", ".join(str(p.size) for p in desc.populations)]
    lines += [f"connect = {c.src} {c.dst} {c.p!r}" for c in desc.connections]
    lines += [f"dt = {desc.dt!r}", f"delay = {desc.delay}"]
    return "\n".join(lines) + "\n"
