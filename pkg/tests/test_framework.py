import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gsample import algorithms as al
from gsample.framework import (
    BiasSpec,
    Entries,
    Kind,
    RunStats,
    SamplingConfig,
    Update,
    _merge_pools,
    _select_frontier,
    commit,
    expand,
    gather_neighbors,
    run,
)
from gsample.graph import CsrGraph, FullView
from gsample.synthetic import cycle_graph, erdos_renyi_graph, path_graph, power_law_graph, star_graph


def edge_set(out):
    return {(int(u), int(v)) for u, v, _ in out.edges}


def test_p3_middle_takes_whole_pool(p3):
    out = run(p3, SamplingConfig(depth=1, neighbor_size=2), BiasSpec(), [1])
    assert edge_set(out[0]) == {(1, 0), (1, 2)}
    assert out[0].depth.tolist() == [1, 1]


def test_single_neighbor_single_edge():
    g = CsrGraph.from_edges([0], [1], directed=True)
    out = run(g, SamplingConfig(depth=1, neighbor_size=1), BiasSpec(), [0])
    assert out[0].edges.tolist() == [[0, 1, 1]]


def test_gather_examples(toy):
    assert gather_neighbors(toy, [8]).target.tolist() == [5, 7, 9, 10, 11]
    assert len(gather_neighbors(toy, [])) == 0
    assert len(gather_neighbors(toy, [8], visited={7, 9, 10, 11, 5}, filter=True)) == 0
    assert gather_neighbors(toy, [8], visited={7}, filter=True).target.tolist() == [5, 9, 10, 11]
    assert gather_neighbors(toy, [8], visited={7}).target.tolist() == [5, 7, 9, 10, 11]
    with pytest.raises(IndexError):
        gather_neighbors(toy, [12])


def test_edge_context_fields(toy):
    batch = gather_neighbors(toy, [8, 5])
    assert batch.source.tolist() == [8] * 5 + [5] * 3
    assert batch.target_degree.tolist()[:5] == [3, 6, 2, 2, 2]
    assert np.all(batch.source_degree[:5] == 5)
    assert np.all(batch.previous == -1)
    assert np.array_equal(toy.col_indices[batch.edge], batch.target)


def test_seed_validation(toy):
    cfg = SamplingConfig(depth=1, instances=2)
    with pytest.raises(ValueError):
        run(toy, cfg, BiasSpec(), [8, []])
    with pytest.raises(IndexError):
        run(toy, cfg, BiasSpec(), [8, 12])
    with pytest.raises(ValueError):
        run(toy, cfg, BiasSpec(), [8])


@pytest.mark.parametrize("kwargs", [dict(depth=0), dict(instances=0), dict(frontier_size=0),
                                    dict(neighbor_size=-1), dict(mode="x"), dict(pool_scope="x"),
                                    dict(strategy="x")])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SamplingConfig(**kwargs)


def test_bias_callbacks_are_validated(toy):
    cfg = SamplingConfig(depth=1)
    bad = BiasSpec(edge_bias=lambda b: -np.ones(len(b)))
    with pytest.raises(ValueError):
        run(toy, cfg, bad, [8])
    short = BiasSpec(edge_bias=lambda b: np.ones(2))
    with pytest.raises(ValueError):
        run(toy, cfg, short, [8])
    wild = BiasSpec(update=lambda b, d: Update(np.full(len(b), 99)))
    with pytest.raises(ValueError):
        run(toy, cfg, wild, [8])


def test_update_returning_nothing_stops_instance(toy):
    spec = BiasSpec(update=lambda b, d: Update(np.full(len(b), -1)))
    out = run(toy, SamplingConfig(depth=5, neighbor_size=2), spec, [8])
    assert len(out[0]) == 2 and np.all(out[0].depth == 1)


def test_seeds_are_not_resampled(toy):
    out = run(toy, SamplingConfig(depth=3, neighbor_size=5), BiasSpec(), [8])
    assert 8 not in out[0].target.tolist()


def test_layer_pool_has_one_quota_per_level():
    g = CsrGraph.from_edges([0, 0, 1, 1, 2, 2], [3, 4, 5, 6, 7, 8], vertex_count=9, directed=True)
    spec = BiasSpec()
    cfg = SamplingConfig(depth=1, neighbor_size=2, pool_scope="layer")
    for seed in range(20):
        out = run(g, SamplingConfig(**{**cfg.__dict__, "seed": seed}), spec, [np.array([0, 1, 2])])
        assert len(out[0]) == 2


def test_layer_pool_keeps_duplicates_across_sources():
    # both sources list vertex 2; the union pool has two contexts for it
    g = CsrGraph.from_edges([0, 1], [2, 2], vertex_count=3, directed=True)
    raw = expand(g, FullView(g), Entries(np.array([0, 1]), np.zeros(2, np.int64), np.zeros(2, np.int64),
                                         np.arange(2), np.full(2, -1), np.zeros(2, np.int64)),
                 SamplingConfig(depth=1, neighbor_size=2, pool_scope="layer"), BiasSpec(), None)
    assert sorted(raw.source.tolist()) == [0, 1]
    records, _ = commit(raw, SamplingConfig(depth=1, pool_scope="layer"), None, 3)
    assert len(records.source) == 1  # same-level duplicate target dropped at commit


def test_frontier_pool_replacement_step(toy):
    # pool {8, 0, 3}: degree bias favours 8; find a seed where 8 picks 7
    desc = al.make("multi-rw", pool_size=3)
    hits = 0
    for seed in range(300):
        cfg = desc.configure(depth=2, seed=seed)
        pool = Entries(np.array([8, 0, 3]), np.zeros(3, np.int64), np.zeros(3, np.int64), np.arange(3),
                       np.full(3, -1), np.full(3, 8))
        frontier, carried = _select_frontier(toy, pool, cfg, desc.spec, None)
        raw = expand(toy, FullView(toy), frontier, cfg, desc.spec, None)
        records, fresh = commit(raw, cfg, None, toy.vertex_count)
        if frontier.vertex.tolist() == [8] and records.target.tolist() == [7]:
            carried.depth = carried.depth + 1
            nxt = _merge_pools(carried, fresh)
            assert nxt.vertex.tolist() == [0, 3, 7]
            assert np.all(nxt.depth == 1)
            hits += 1
    assert hits > 10


def test_frontier_pass_through_when_pool_fits(toy):
    pool = Entries(np.array([8, 0]), np.zeros(2, np.int64), np.zeros(2, np.int64), np.arange(2),
                   np.full(2, -1), np.full(2, 8))
    frontier, carried = _select_frontier(toy, pool, SamplingConfig(frontier_size=2), BiasSpec(), None)
    assert frontier is pool and len(carried) == 0


def test_instance_subset_reproduces_full_run():
    g = power_law_graph(400, 2000, seed=2)
    cfg = SamplingConfig(depth=3, neighbor_size=3, instances=10, seed=11)
    seeds = list(np.arange(10) * 7)
    full = run(g, cfg, BiasSpec(), seeds)
    part = run(g, cfg, BiasSpec(), seeds[4:7], instance_ids=[4, 5, 6])
    for a, b in zip(full[4:7], part):
        assert a.instance == b.instance and a.tobytes() == b.tobytes()


def test_stats_count_picks(toy):
    stats = RunStats()
    out = run(toy, SamplingConfig(depth=2, neighbor_size=2, instances=3), BiasSpec(), [8, 7, 5], stats=stats)
    assert stats.picks >= sum(len(o) for o in out)
    assert stats.levels == 2


graphs = st.builds(
    lambda n, m, seed: erdos_renyi_graph(n, m, seed),
    st.integers(2, 40), st.integers(1, 120), st.integers(0, 10_000),
)


@given(graphs, st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32),
       st.sampled_from(["neighbor-unbiased", "neighbor-biased", "forest-fire", "snowball", "layer"]))
def test_traversal_invariants(g, depth, k, seed, name):
    desc = al.make(name)
    cfg = desc.configure(depth=depth, neighbor_size=k, instances=3, seed=seed)
    seeds = [int(v) % g.vertex_count for v in (0, 1, seed)]
    for out, s in zip(run(g, cfg, desc.spec, seeds), seeds):
        assert np.all(out.kind == Kind.EDGE)
        assert np.all((out.depth >= 1) & (out.depth <= depth))
        assert np.all(g.has_edge(out.source, out.target))
        assert len(set(out.target.tolist())) == len(out)
        assert s not in out.target.tolist()
        # every source was reached at the previous level
        reached = {s: 0} | {int(t): int(d) for t, d in zip(out.target, out.depth)}
        assert all(reached.get(int(u), -1) == d - 1 for u, d in zip(out.source, out.depth))


@given(graphs, st.integers(1, 30), st.integers(0, 2**32),
       st.sampled_from(["simple-rw", "biased-rw", "mh-rw", "rw-jump", "rw-restart", "node2vec"]))
def test_walk_invariants(g, length, seed, name):
    desc = al.make(name)
    cfg = desc.configure(depth=length, instances=2, seed=seed)
    seeds = [int(np.argmax(g.degrees)), 0]
    for out, s in zip(run(g, cfg, desc.spec, seeds), seeds):
        cur = s
        for u, v, d, kind in zip(out.source, out.target, out.depth, out.kind):
            assert u == cur and 1 <= d <= length
            if kind == Kind.EDGE:
                assert g.has_edge(u, v)
            cur = v
        assert len(out) <= length
        assert np.array_equal(out.depth, np.arange(1, len(out) + 1))


def test_walk_on_two_cycle_alternates():
    g = path_graph(2)
    out = run(g, SamplingConfig(depth=6, neighbor_size=1, mode="with"), BiasSpec(), [0])
    assert out[0].target.tolist() == [1, 0, 1, 0, 1, 0]


def test_strategies_agree_in_distribution_not_stream():
    g = star_graph(6)
    spec = BiasSpec()
    counts = {}
    for strategy in ("brs", "repeated", "updated"):
        cfg = SamplingConfig(depth=1, neighbor_size=3, instances=3000, strategy=strategy, seed=1)
        out = run(g, cfg, spec, [0] * 3000)
        counts[strategy] = np.bincount(np.concatenate([o.target for o in out]), minlength=7)[1:] / 9000
    for c in counts.values():
        assert np.abs(c - 1 / 6).max() < 0.02


def test_outputs_are_deterministic():
    g = cycle_graph(50)
    cfg = SamplingConfig(depth=10, neighbor_size=1, mode="with", instances=4, seed=5)
    a = run(g, cfg, BiasSpec(), [0, 1, 2, 3])
    b = run(g, cfg, BiasSpec(), [0, 1, 2, 3])
    assert [x.tobytes() for x in a] == [x.tobytes() for x in b]


# --- execution shortcuts must not change results ----------------------------

@pytest.mark.parametrize("name", ["simple-rw", "biased-rw", "mh-rw", "rw-jump", "rw-restart"])
def test_row_tables_match_per_pool_ctps(name):
    import dataclasses

    from gsample import algorithms as al
    from gsample.synthetic import power_law_graph

    g = power_law_graph(3000, 9000, seed=4, weighted=True)
    d = al.make(name, bias="weight") if name == "biased-rw" else al.make(name)
    assert d.spec.static_edge_bias
    slow = dataclasses.replace(d.spec, static_edge_bias=False)
    cfg = d.configure(depth=60, instances=80, seed=9)
    seeds = [int(v) for v in np.flatnonzero(g.degrees)[:80]]
    s1, s2 = RunStats(), RunStats()
    fast = run(g, cfg, d.spec, seeds, stats=s1)
    ref = run(g, cfg, slow, seeds, stats=s2)
    assert [o.tobytes() for o in fast] == [o.tobytes() for o in ref]
    assert (s1.picks, s1.retries) == (s2.picks, s2.retries)


def test_row_tables_skip_zero_mass_rows():
    from gsample.kernels import build_row_tables, draw_from_tables

    offsets = np.array([0, 2, 2, 5])
    biases = np.array([0.0, 0.0, 1.0, 0.0, 3.0])
    table, positive = build_row_tables(offsets, biases)
    assert positive.tolist() == [0, 0, 2]
    assert np.isnan(table[0:3]).all()
    np.testing.assert_allclose(table[4:8], [0, 0.25, 0.25, 1.0])  # row v starts at offsets[v] + v
    picks = draw_from_tables(table, np.array([4]), np.array([3]), np.array([500]), np.array([123], dtype=np.uint64))
    assert set(picks.tolist()) == {0, 2}


@pytest.mark.parametrize("name", ["neighbor-biased", "snowball", "forest-fire", "layer", "node2vec"])
def test_chunked_expand_is_invisible(name, monkeypatch):
    from gsample import algorithms as al
    from gsample import framework
    from gsample.synthetic import power_law_graph

    g = power_law_graph(2000, 8000, seed=5)
    d = al.make(name)
    cfg = d.configure(depth=20 if d.walk else 3, instances=40, seed=2)
    seeds = [int(v) for v in np.flatnonzero(g.degrees)[:40]]
    ref = run(g, cfg, d.spec, seeds)
    monkeypatch.setattr(framework, "MAX_GATHER", 64)
    got = run(g, cfg, d.spec, seeds)
    assert [o.tobytes() for o in got] == [o.tobytes() for o in ref]
