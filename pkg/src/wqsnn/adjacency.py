"""Padded adjacency table built from jobs of sorted random integers.

Construction has two phases. :func:`plan_jobs` samples every neuron's
out-degree towards each target population and emits one job
``(n, a, b, o)`` per (neuron, connection): write ``n`` sorted distinct
integers from ``[a, b)`` at flat offset ``o``. :func:`expand_jobs` then fills
the table; every job owns its own xorshift stream, so the result does not
depend on job order or on how many worker threads share the work.
"""

from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import NetworkDescriptor, global_id_range, validate
from .rng import XorshiftLanes, derive_seeds

SENTINEL = int(np.iinfo(np.int32).max)
ID_DTYPE = np.int32
DEFAULT_ALIGN = 32
_MAGIC = b"WQADJ001"
_CHUNK_ELEMS = 1 << 22


class ConstructionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstructionJob:
    n: int
    a: int
    b: int
    o: int
    seed: int = 1

    def __post_init__(self):
        if self.b <= self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b})")
        if not 0 <= self.n <= self.b - self.a:
            raise ValueError(f"cannot draw {self.n} distinct values from [{self.a}, {self.b})")


@dataclass
class JobPlan:
    """Job queue plus the per-neuron bookkeeping needed to lay out rows.

    Jobs are held column-wise (``n``, ``a``, ``b``, ``o``, ``seeds``); iterate
    :attr:`jobs` for :class:`ConstructionJob` objects.
    """

    num_neurons: int
    n: np.ndarray
    a: np.ndarray
    b: np.ndarray
    o: np.ndarray
    seeds: np.ndarray
    degrees: np.ndarray
    deg_max: int
    row_pitch: int
    rows_presorted: bool = True

    def __len__(self) -> int:
        return len(self.n)

    @property
    def total_synapses(self) -> int:
        return int(self.degrees.sum(dtype=np.int64))

    @property
    def jobs(self) -> list[ConstructionJob]:
        return [ConstructionJob(int(n), int(a), int(b), int(o), int(s))
                for n, a, b, o, s in zip(self.n, self.a, self.b, self.o, self.seeds)]

    @classmethod
    def from_jobs(cls, num_neurons: int, jobs: list[ConstructionJob],
                  row_pitch: int | None = None) -> "JobPlan":
        """Wrap hand-written jobs; offsets must follow ``row * row_pitch + column``."""
        n = np.array([j.n for j in jobs], dtype=np.int64)
        o = np.array([j.o for j in jobs], dtype=np.int64)
        if row_pitch is None:
            if num_neurons > 1:
                raise ValueError("row_pitch is required for multi-row job lists")
            row_pitch = _pitch(int((o + n).max(initial=0)))
        if len(jobs) and np.any(o // row_pitch != (o + np.maximum(n, 1) - 1) // row_pitch):
            raise ValueError("a job crosses a row boundary")
        degrees = np.zeros(num_neurons, dtype=np.int64)
        if len(jobs):
            np.add.at(degrees, o // max(row_pitch, 1), n)
        return cls(num_neurons, n,
                   np.array([j.a for j in jobs], dtype=np.int64),
                   np.array([j.b for j in jobs], dtype=np.int64), o,
                   np.array([j.seed for j in jobs], dtype=np.uint64),
                   degrees, int(degrees.max(initial=0)), row_pitch, rows_presorted=False)


@dataclass
class AdjacencyList:
    """``|N|`` rows of neighbour ids, each sorted and sentinel padded."""

    table: np.ndarray  # (|N|, row_pitch) int32
    degrees: np.ndarray
    deg_max: int
    sentinel: int = SENTINEL

    @property
    def num_neurons(self) -> int:
        return self.table.shape[0]

    @property
    def row_pitch(self) -> int:
        return self.table.shape[1]

    @property
    def num_synapses(self) -> int:
        return int(self.degrees.sum(dtype=np.int64))

    def row(self, neuron: int) -> np.ndarray:
        return row(self, neuron)

    @property
    def nbytes(self) -> int:
        return self.table.nbytes

    def dump(self, path: str | Path) -> None:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<4q", self.num_neurons, self.row_pitch, self.deg_max, self.sentinel))
            fh.write(np.ascontiguousarray(self.table, dtype="<i4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "AdjacencyList":
        raw = Path(path).read_bytes()
        if raw[:8] != _MAGIC:
            raise ValueError(f"{path}: not an adjacency dump")
        n, pitch, deg_max, sentinel = struct.unpack_from("<4q", raw, 8)
        table = np.frombuffer(raw, dtype="<i4", offset=40, count=n * pitch).reshape(n, pitch)
        table = table.astype(ID_DTYPE)
        degrees = (table != sentinel).sum(axis=1).astype(np.int32)
        return cls(table, degrees, int(deg_max), int(sentinel))


def row(adj: AdjacencyList, neuron: int) -> np.ndarray:
    """Valid neighbour ids of ``neuron`` (sentinels stripped)."""
    if not 0 <= neuron < adj.num_neurons:
        raise IndexError(f"neuron {neuron} out of range [0, {adj.num_neurons})")
    return adj.table[neuron, :adj.degrees[neuron]]


def _pitch(deg_max: int, align: int = DEFAULT_ALIGN) -> int:
    return align * max(1, -(-deg_max // align))


def _master_seed(rng) -> tuple[np.random.Generator, int]:
    if isinstance(rng, np.random.Generator):
        return rng, int(rng.integers(1, 2**63))
    seed = int(rng)
    return np.random.default_rng(seed), seed


def plan_jobs(desc: NetworkDescriptor, rng=0, align: int = DEFAULT_ALIGN) -> JobPlan:
    """Sample out-degrees and lay out one job per (source neuron, connection).

    ``rng`` is an integer seed or a :class:`numpy.random.Generator`. Each
    out-degree is Binomial(|target population|, p). Within a row the
    segments are ordered by target interval, so rows come out sorted.
    """
    validate(desc)
    gen, master = _master_seed(rng)
    total = desc.num_neurons
    conns = sorted(desc.connections, key=lambda c: (c.src, global_id_range(desc, c.dst)[0]))

    n_parts, a_parts, src_parts = [], [], []
    b_parts = []
    for c in conns:
        s0, s1 = global_id_range(desc, c.src)
        a, b = global_id_range(desc, c.dst)
        n_parts.append(gen.binomial(b - a, c.p, size=s1 - s0).astype(np.int64))
        a_parts.append(np.full(s1 - s0, a, dtype=np.int64))
        b_parts.append(np.full(s1 - s0, b, dtype=np.int64))
        src_parts.append(np.arange(s0, s1, dtype=np.int64))
    if conns:
        n = np.concatenate(n_parts)
        a = np.concatenate(a_parts)
        b = np.concatenate(b_parts)
        src = np.concatenate(src_parts)
    else:
        n = a = b = src = np.zeros(0, dtype=np.int64)

    degrees = np.bincount(src, weights=n, minlength=total).astype(np.int64) if len(n) else np.zeros(total, np.int64)
    deg_max = int(degrees.max(initial=0))
    pitch = _pitch(deg_max, align)

    # column where each job starts inside its row: running total of earlier
    # segments of the same source (jobs are grouped by source population, and
    # within a population by connection in target order)
    order = np.argsort(src, kind="stable")
    n_sorted = n[order]
    run = np.cumsum(n_sorted) - n_sorted
    first_of_src = np.searchsorted(src[order], src[order], side="left")
    col = np.empty_like(n)
    col[order] = run - run[first_of_src]
    o = src * pitch + col

    seeds = derive_seeds(master, len(n), salt=0xAD1)
    return JobPlan(total, n, a, b, o, seeds, degrees, deg_max, pitch)


def _draw_uniforms(rng, count: int) -> np.ndarray:
    if isinstance(rng, np.random.Generator):
        return 1.0 - rng.random(count)
    return np.array([rng.uniform() for _ in range(count)], dtype=np.float64)


def sorted_random_rows(uniforms, a: int, b: int) -> dict[str, np.ndarray]:
    """Every intermediate row of one expansion, given its ``n + 2`` draws.

    Keys follow the order of operations: ``draws``, ``exp`` (negative log),
    ``prefix`` (running sum starting at 0), ``normalized``, ``scaled``
    (rounded), ``offsets`` and ``result``.
    """
    u = np.asarray(uniforms, dtype=np.float64)
    n = len(u) - 2
    if n < 0:
        raise ValueError("need at least the two sentinel draws")
    if b <= a or n > b - a:
        raise ValueError(f"cannot draw {n} distinct values from [{a}, {b})")
    e = -np.log(u)
    prefix = np.concatenate(([0.0], np.cumsum(e[:-1])))
    normalized = prefix / prefix[-1]
    scaled = np.floor(normalized * (b - a - n) + 0.5)
    offsets = np.arange(n)
    result = (scaled[1:-1] + offsets).astype(np.int64) + a
    return {"draws": u, "exp": e, "prefix": prefix, "normalized": normalized,
            "scaled": scaled, "offsets": offsets, "result": result}


def sorted_random(n: int, a: int, b: int, rng) -> np.ndarray:
    """``n`` sorted, distinct, roughly uniform integers from ``[a, b)``.

    ``rng`` is anything with a ``uniform()`` method returning values in
    (0, 1] (e.g. :class:`~wqsnn.rng.Xorshift64`) or a numpy Generator.
    """
    if b <= a:
        raise ValueError(f"empty interval [{a}, {b})")
    if not 0 <= n <= b - a:
        raise ValueError(f"cannot draw {n} distinct values from [{a}, {b})")
    return sorted_random_rows(_draw_uniforms(rng, n + 2), a, b)["result"]


def _expand_chunk(n, a, b, seeds) -> tuple[np.ndarray, np.ndarray]:
    """Values for a batch of jobs; returns ``(values, mask)`` shaped ``(cols, jobs)``."""
    cols = int(n.max(initial=0)) + 2
    lanes = XorshiftLanes(seeds)
    e = np.empty((cols, len(n)), dtype=np.float64)
    for k in range(cols):
        e[k] = lanes.uniform()
    np.log(e, out=e)
    np.negative(e, out=e)
    # prefix row k (k >= 1) is the inclusive sum of draws 0..k-1
    np.cumsum(e, axis=0, out=e)
    total = e[n, np.arange(len(n))]
    k = np.arange(cols - 2)[:, None]
    vals = np.floor(e[:-2] / total * (b - a - n) + 0.5) + k + a
    return vals, k < n


def expand_jobs(plan: JobPlan, threads: int = 1) -> AdjacencyList:
    """Run every job of ``plan`` and return the finished table."""
    total = plan.num_neurons
    table = np.full(total * plan.row_pitch, SENTINEL, dtype=ID_DTYPE)
    order = np.argsort(plan.n, kind="stable")
    widths = plan.n[order] + 2
    chunks = []
    start = 0
    while start < len(order):
        # largest stop keeping the padded (cols x jobs) block under budget;
        # widths are ascending so the last job sets the block height
        lo, hi = start + 1, len(order)
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if widths[mid - 1] * (mid - start) <= _CHUNK_ELEMS:
                lo = mid
            else:
                hi = mid - 1
        chunks.append(order[start:lo])
        start = lo

    def work(idx):
        n = plan.n[idx]
        if not n.any():
            return 0
        vals, mask = _expand_chunk(n, plan.a[idx], plan.b[idx], plan.seeds[idx])
        pos = (plan.o[idx][None, :] + np.arange(vals.shape[0])[:, None])[mask]
        # generated plans tile rows by construction; hand-written ones may collide
        # inside a single batch, where the sentinel check cannot see it
        clash = not plan.rows_presorted and len(np.unique(pos)) != len(pos)
        if clash or np.any(table[pos] != SENTINEL):
            raise ConstructionError("overlapping job offsets")
        table[pos] = vals[mask].astype(ID_DTYPE)
        return int(mask.sum())

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            written = sum(pool.map(work, chunks))
    else:
        written = sum(work(c) for c in chunks)
    if written != plan.total_synapses:
        raise ConstructionError(f"wrote {written} entries, expected {plan.total_synapses}")

    table = table.reshape(total, plan.row_pitch)
    if not plan.rows_presorted:
        for r0 in range(0, total, 4096):
            table[r0:r0 + 4096].sort(axis=1)
        if np.any((table[:, 1:] == table[:, :-1]) & (table[:, 1:] != SENTINEL)):
            raise ConstructionError("duplicate edge produced by overlapping jobs")
    return AdjacencyList(table, plan.degrees.astype(np.int32), plan.deg_max)


def build_adjacency(desc: NetworkDescriptor, seed=0, threads: int = 1,
                    align: int = DEFAULT_ALIGN) -> AdjacencyList:
    return expand_jobs(plan_jobs(desc, seed, align), threads)
