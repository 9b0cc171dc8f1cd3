from collections import OrderedDict

import numpy as np
import pytest

from app.machine import DRAM, L1_HIT, LLC_HIT, CacheLevel, MemorySystem, SystemConfig, sweep_set


def naive_sweep(d: OrderedDict, ways: int, tags, write: bool):
    """Per-line LRU reference: returns (hits, misses, dirty victims)."""
    hits, misses, victims = [], 0, []
    for t in tags:
        if t in d:
            d.move_to_end(t)
            d[t] = d[t] or write
            hits.append(t)
            continue
        misses += 1
        if len(d) == ways:
            old, dirty = d.popitem(last=False)
            if dirty:
                victims.append(old)
        d[t] = write
    return hits, misses, victims


def random_set(rng, ways, span):
    tags = rng.choice(span, size=int(rng.integers(0, ways + 1)), replace=False)
    return OrderedDict((int(t), bool(rng.integers(2))) for t in tags)


def test_sweep_set_matches_per_line_lru(rng):
    for _ in range(2000):
        ways = int(rng.integers(1, 6))
        ref = random_set(rng, ways, 40)
        d = dict(ref)
        first = int(rng.integers(0, 30))
        last = first + int(rng.integers(0, 15))
        run = list(range(first, last + 1))
        skip = sorted(int(t) for t in run if rng.random() < 0.2)
        write = bool(rng.integers(2))

        out = sweep_set(d, ways, first, last, skip, write)
        hits, misses, victims = naive_sweep(ref, ways, [t for t in run if t not in skip], write)

        assert sorted(out.hits) == sorted(hits)
        assert out.misses == misses
        assert sorted(out.dirty_victims) == sorted(victims)
        assert list(d.items()) == list(ref.items())


def test_cache_level_matches_per_line_lru(rng):
    level = CacheLevel("t", size=4 * 2 * 64, ways=2, line_size=64)
    ref = [OrderedDict() for _ in range(level.n_sets)]
    for _ in range(300):
        first = int(rng.integers(0, 64))
        last = first + int(rng.integers(0, 20))
        write = bool(rng.integers(2))
        out = level.access(first, last, write)

        hits, misses, victims = [], 0, []
        for line in range(first, last + 1):
            s, t = line % level.n_sets, line // level.n_sets
            h, m, v = naive_sweep(ref[s], level.ways, [t], write)
            hits += [x * level.n_sets + s for x in h]
            misses += m
            victims += [x * level.n_sets + s for x in v]

        assert out.hit_lines == sorted(hits)
        assert out.misses == misses
        assert sorted(out.dirty_victims) == sorted(victims)
    for s in range(level.n_sets):
        assert list(level.sets[s].items()) == list(ref[s].items())


def test_set_index_and_tag():
    level = CacheLevel("t", size=8 * 64, ways=2, line_size=64)
    assert level.n_sets == 4
    level.access(9, 9, False)
    assert level.sets[1] == {2: False}
    assert level.contains(9)
    level.invalidate(9)
    assert not level.contains(9)


def test_first_touch_then_l1_hit(high_cfg):
    mem = MemorySystem(high_cfg)
    level, lat = mem.cache_access(0, 0x1000, 64)
    assert level == DRAM
    assert lat == high_cfg.l1_latency + high_cfg.llc_latency + high_cfg.dram_latency
    level, lat = mem.cache_access(0, 0x1000, 64)
    assert (level, lat) == (L1_HIT, high_cfg.l1_latency)
    assert mem.counters.l1_hits[0] == 1 and mem.counters.l1_misses[0] == 1
    assert mem.counters.llc_misses == 1


def test_streaming_cost(high_cfg):
    mem = MemorySystem(high_cfg)
    _, lat = mem.cache_access(0, 0, 4 * 64)
    c = high_cfg
    assert lat == c.l1_latency + c.llc_latency + c.dram_latency + 3 * c.dram_stream


def test_shared_write_invalidates_other_l1(high_cfg):
    mem = MemorySystem(high_cfg)
    mem.cache_access(0, 0x2000, 64)
    mem.cache_access(1, 0x2000, 64, write=True, shared=True)
    level, lat = mem.cache_access(0, 0x2000, 64)
    assert level == LLC_HIT
    assert lat == high_cfg.l1_latency + high_cfg.llc_latency


def test_repeated_reads_extrapolate(high_cfg):
    direct, bulk = MemorySystem(high_cfg), MemorySystem(high_cfg)
    nbytes = 3 * high_cfg.l1_size  # does not fit in L1
    total = sum(direct.cache_access(0, 0, nbytes)[1] for _ in range(6))
    assert bulk.access_repeated(0, 0, nbytes, 6) == total
    assert bulk.counters == direct.counters


@pytest.mark.parametrize("nbytes", [1, 64, 65])
def test_line_span(high_cfg, nbytes):
    mem = MemorySystem(high_cfg)
    mem.cache_access(0, 0, nbytes)
    assert mem.counters.l1_misses[0] == -(-nbytes // 64)


def test_summed_latency_when_streams_cost_full_latency(high_cfg):
    c = high_cfg
    flat = SystemConfig.for_profile(
        "high_power",
        l1_stream=c.l1_latency,
        llc_stream=c.l1_latency + c.llc_latency,
        dram_stream=c.l1_latency + c.llc_latency + c.dram_latency,
    )
    mem = MemorySystem(flat)
    _, lat = mem.cache_access(0, 0, 4 * 64)
    assert lat == 4 * (c.l1_latency + c.llc_latency + c.dram_latency)
    _, lat = mem.cache_access(0, 0, 4 * 64)
    assert lat == 4 * c.l1_latency


def test_streaming_past_the_llc_twice_still_misses(high_cfg):
    mem = MemorySystem(high_cfg)
    nbytes = 2 * high_cfg.llc_size
    mem.cache_access(0, 0, nbytes)
    before = mem.counters.llc_misses
    mem.cache_access(0, 0, nbytes)
    assert mem.counters.llc_misses - before == nbytes // high_cfg.line_size


def test_streaming_within_the_llc_twice_hits(high_cfg):
    mem = MemorySystem(high_cfg)
    nbytes = high_cfg.llc_size // 2
    mem.cache_access(0, 0, nbytes)
    before = mem.counters.llc_misses
    mem.cache_access(0, 0, nbytes)
    assert mem.counters.llc_misses == before


def test_shrinking_l1_never_decreases_misses(rng):
    big = MemorySystem(SystemConfig.for_profile("high_power"))
    small = MemorySystem(SystemConfig.for_profile("high_power", l1_size=32 * 1024))
    for _ in range(400):
        core = int(rng.integers(0, 2))
        addr = int(rng.integers(0, 256 * 1024))
        nbytes = int(rng.integers(1, 8 * 1024))
        write = bool(rng.integers(2))
        big.cache_access(core, addr, nbytes, write)
        small.cache_access(core, addr, nbytes, write)
        for core_id in range(2):
            assert small.counters.l1_misses[core_id] >= big.counters.l1_misses[core_id]


def test_overflowing_repeated_streams_evict_each_other(high_cfg):
    nbytes = 3 * high_cfg.llc_size // 4
    lines = nbytes // high_cfg.line_size

    alone = MemorySystem(high_cfg)
    alone.access_repeated(0, 0, nbytes, 3)
    assert alone.counters.llc_misses == lines

    shared = MemorySystem(high_cfg)
    shared.access_repeated(1, 1 << 24, nbytes, 1)
    before = shared.counters.llc_misses
    shared.access_repeated(0, 0, nbytes, 3)
    assert shared.contended()
    assert shared.counters.llc_misses - before == 3 * lines

    shared.release(1)
    assert not shared.contended()
