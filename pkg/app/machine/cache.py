"""
Set-associative LRU caches: private write-back L1s over a shared LLC.

Each set is a dict mapping tag -> dirty, kept in LRU -> MRU insertion order.
A sequential access to a line range is applied set by set: within one set the
touched tags form an increasing run, so the outcome of a long run follows from
the few tags already resident (see ``sweep_set``) instead of per-line updates.
"""
import bisect
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from app.machine.config import SystemConfig

L1_HIT, LLC_HIT, DRAM = "l1_hit", "llc_hit", "dram"

# repeated reads converge: from the third pass on, every pass behaves like the third
EXACT_REPEATS = 3


def _count_in(skip: Sequence[int], lo: int, hi: int) -> int:
    """Number of entries of the sorted ``skip`` within [lo, hi]."""
    if hi < lo:
        return 0
    return bisect.bisect_right(skip, hi) - bisect.bisect_left(skip, lo)


def _run_head(first: int, skip: set, n: int) -> Iterator[int]:
    t = first
    while n:
        if t not in skip:
            yield t
            n -= 1
        t += 1


def _run_tail(last: int, skip: set, n: int) -> list[int]:
    out = []
    t = last
    while len(out) < n:
        if t not in skip:
            out.append(t)
        t -= 1
    out.reverse()
    return out


@dataclass
class SetOutcome:
    hits: list[int] = field(default_factory=list)
    misses: int = 0
    dirty_victims: list[int] = field(default_factory=list)


def sweep_set(d: dict[int, bool], ways: int, first: int, last: int, skip: Sequence[int], write: bool) -> SetOutcome:
    """
    Access tags first..last of one set in increasing order, except those in ``skip``.

    Args:
        d: Set contents, tag -> dirty in LRU -> MRU order; updated in place.
        ways: Associativity.
        first: First tag of the run.
        last: Last tag of the run.
        skip: Sorted tags inside the run that are not accessed.
        write: Whether the accesses write (set the dirty bit).

    Returns:
        Hit tags, the miss count and the tags of evicted dirty lines.
    """
    out = SetOutcome()
    m = (last - first + 1) - _count_in(skip, first, last)
    if m <= 0:
        return out
    skip_set = set(skip)
    untouched = dict(d)
    candidates = sorted(t for t in untouched if first <= t <= last and t not in skip_set)
    free = ways - len(untouched)
    touched = 0
    evicted_touched = 0
    hit_dirty: dict[int, bool] = {}

    def misses(g: int) -> None:
        nonlocal free, touched, evicted_touched
        touched += g
        use = min(free, g)
        free -= use
        g -= use
        while g and untouched:
            tag = next(iter(untouched))
            if untouched.pop(tag):
                out.dirty_victims.append(tag)
            g -= 1
        evicted_touched += g

    pos = first
    for c in candidates:
        misses((c - pos) - _count_in(skip, pos, c - 1))
        if c in untouched:
            hit_dirty[c] = untouched.pop(c)
            out.hits.append(c)
            touched += 1
        else:
            misses(1)
        pos = c + 1
    misses((last - pos + 1) - _count_in(skip, pos, last))

    # touched lines leave in access order, so the evicted ones are the head of the run
    if evicted_touched:
        if write:
            out.dirty_victims.extend(_run_head(first, skip_set, evicted_touched))
        else:
            cutoff = None
            for t in _run_head(first, skip_set, evicted_touched):
                cutoff = t
            out.dirty_victims.extend(t for t in out.hits if t <= cutoff and hit_dirty[t])

    keep = _run_tail(last, skip_set, touched - evicted_touched)
    d.clear()
    d.update(untouched)
    for t in keep:
        d[t] = write or hit_dirty.get(t, False)
    out.misses = m - len(out.hits)
    return out


@dataclass
class RangeOutcome:
    hit_lines: list[int] = field(default_factory=list)
    misses: int = 0
    dirty_victims: list[int] = field(default_factory=list)


class CacheLevel:
    def __init__(self, name: str, size: int, ways: int, line_size: int) -> None:
        self.name = name
        self.ways = ways
        self.n_sets = size // (line_size * ways)
        self.sets: list[dict[int, bool]] = [{} for _ in range(self.n_sets)]

    def __repr__(self) -> str:
        return f"CacheLevel({self.name}, {self.n_sets} sets x {self.ways} ways)"

    def contains(self, line: int) -> bool:
        return line // self.n_sets in self.sets[line % self.n_sets]

    def invalidate(self, line: int) -> None:
        self.sets[line % self.n_sets].pop(line // self.n_sets, None)

    def access(self, first_line: int, last_line: int, write: bool, skip_lines: Sequence[int] = ()) -> RangeOutcome:
        """Sequentially access lines first_line..last_line, leaving out the sorted ``skip_lines``."""
        S = self.n_sets
        out = RangeOutcome()
        skip_by_set: dict[int, list[int]] = {}
        for line in skip_lines:
            skip_by_set.setdefault(line % S, []).append(line // S)
        n = last_line - first_line + 1
        sets = range(S) if n >= S else sorted({line % S for line in range(first_line, last_line + 1)})
        for s in sets:
            t_first = -(-(first_line - s) // S)
            t_last = (last_line - s) // S
            if t_first > t_last:
                continue
            r = sweep_set(self.sets[s], self.ways, t_first, t_last, skip_by_set.get(s, ()), write)
            out.misses += r.misses
            out.hit_lines.extend(t * S + s for t in r.hits)
            out.dirty_victims.extend(t * S + s for t in r.dirty_victims)
        out.hit_lines.sort()
        return out


@dataclass
class CacheCounters:
    l1_hits: list[int]
    l1_misses: list[int]
    llc_hits: int = 0
    llc_misses: int = 0
    llc_read_bytes: int = 0
    llc_write_bytes: int = 0
    dram_accesses: int = 0

    @classmethod
    def zeros(cls, n_cores: int) -> "CacheCounters":
        return cls([0] * n_cores, [0] * n_cores)

    def delta(self, before: "CacheCounters") -> "CacheCounters":
        return CacheCounters(
            [a - b for a, b in zip(self.l1_hits, before.l1_hits)],
            [a - b for a, b in zip(self.l1_misses, before.l1_misses)],
            self.llc_hits - before.llc_hits,
            self.llc_misses - before.llc_misses,
            self.llc_read_bytes - before.llc_read_bytes,
            self.llc_write_bytes - before.llc_write_bytes,
            self.dram_accesses - before.dram_accesses,
        )

    def add(self, other: "CacheCounters", times: int = 1) -> None:
        for i, v in enumerate(other.l1_hits):
            self.l1_hits[i] += v * times
        for i, v in enumerate(other.l1_misses):
            self.l1_misses[i] += v * times
        self.llc_hits += other.llc_hits * times
        self.llc_misses += other.llc_misses * times
        self.llc_read_bytes += other.llc_read_bytes * times
        self.llc_write_bytes += other.llc_write_bytes * times
        self.dram_accesses += other.dram_accesses * times

    def copy(self) -> "CacheCounters":
        return CacheCounters(list(self.l1_hits), list(self.l1_misses), self.llc_hits, self.llc_misses,
                             self.llc_read_bytes, self.llc_write_bytes, self.dram_accesses)


class MemorySystem:
    """Per-core L1s, one shared non-inclusive LLC and a flat-latency DRAM."""

    def __init__(self, cfg: SystemConfig) -> None:
        self.cfg = cfg
        self.l1s = [CacheLevel(f"l1[{i}]", cfg.l1_size, cfg.l1_ways, cfg.line_size) for i in range(cfg.n_cores)]
        self.llc = CacheLevel("llc", cfg.llc_size, cfg.llc_ways, cfg.line_size)
        self.counters = CacheCounters.zeros(cfg.n_cores)
        # bytes each core streams over and over (its weight matrix), while it runs
        self.footprints: dict[int, int] = {}

    def full_latency(self, level: str) -> int:
        c = self.cfg
        if level == L1_HIT:
            return c.l1_latency
        if level == LLC_HIT:
            return c.l1_latency + c.llc_latency
        return c.l1_latency + c.llc_latency + c.dram_latency

    def cache_access(self, core: int, addr: int, nbytes: int, write: bool = False, shared: bool = False) -> tuple[str, int]:
        """
        Access ``nbytes`` at ``addr`` from ``core``.

        Returns:
            The level that served the first line and the latency in core cycles.
        """
        first = addr // self.cfg.line_size
        last = (addr + max(nbytes, 1) - 1) // self.cfg.line_size
        return self._pass(core, first, last, write, shared)

    def contended(self) -> bool:
        """Whether the repeated streams of the running cores together overflow the LLC."""
        return sum(self.footprints.values()) > self.cfg.llc_size

    def release(self, core: int) -> None:
        self.footprints.pop(core, None)

    def access_repeated(self, core: int, addr: int, nbytes: int, repeat: int) -> int:
        """
        Read the same bytes ``repeat`` times back to back; returns the total latency.

        The passes of other cores interleave with these in time. When all running
        streams together overflow the LLC they evict each other, so every pass after
        the first starts with this range gone from the LLC.
        """
        first = addr // self.cfg.line_size
        last = (addr + max(nbytes, 1) - 1) // self.cfg.line_size
        self.footprints[core] = (last - first + 1) * self.cfg.line_size
        contended = self.contended()
        total = 0
        for k in range(min(repeat, EXACT_REPEATS)):
            if k and contended:
                for ln in range(first, last + 1):
                    self.llc.invalidate(ln)
            before = self.counters.copy()
            _, lat = self._pass(core, first, last, False, False)
            total += lat
        if repeat > EXACT_REPEATS:
            extra = repeat - EXACT_REPEATS
            self.counters.add(self.counters.delta(before), extra)
            total += lat * extra
        return total

    def _pass(self, core: int, first: int, last: int, write: bool, shared: bool) -> tuple[str, int]:
        c, k, line = self.cfg, self.counters, self.cfg.line_size
        n = last - first + 1
        l1 = self.l1s[core]
        # shared data is written through, so the private copy stays clean
        r1 = l1.access(first, last, write and not shared)
        k.l1_hits[core] += len(r1.hit_lines)
        k.l1_misses[core] += r1.misses

        for victim in r1.dirty_victims:
            rw = self.llc.access(victim, victim, True)
            k.llc_write_bytes += line
            k.dram_accesses += len(rw.dirty_victims)

        llc_hits = 0
        first_level = L1_HIT if r1.hit_lines and r1.hit_lines[0] == first else None
        if r1.misses:
            r2 = self.llc.access(first, last, False, r1.hit_lines)
            llc_hits = len(r2.hit_lines)
            k.llc_hits += llc_hits
            k.llc_misses += r2.misses
            k.llc_read_bytes += r1.misses * line
            k.llc_write_bytes += r2.misses * line
            k.dram_accesses += r2.misses + len(r2.dirty_victims)
            if first_level is None:
                first_level = LLC_HIT if r2.hit_lines and r2.hit_lines[0] == first else DRAM

        if write and shared:
            rw = self.llc.access(first, last, True)
            k.llc_write_bytes += n * line
            k.dram_accesses += len(rw.dirty_victims)
            for other, cache in enumerate(self.l1s):
                if other != core:
                    for ln in range(first, last + 1):
                        cache.invalidate(ln)

        dram_lines = n - len(r1.hit_lines) - llc_hits
        stream = len(r1.hit_lines) * c.l1_stream + llc_hits * c.llc_stream + dram_lines * c.dram_stream
        first_stream = {L1_HIT: c.l1_stream, LLC_HIT: c.llc_stream, DRAM: c.dram_stream}[first_level]
        return first_level, self.full_latency(first_level) + stream - first_stream
