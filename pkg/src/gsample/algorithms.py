"""Sampling and random-walk algorithms written against the BiasSpec API only."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .framework import BiasSpec, EdgeBatch, Kind, SamplingConfig, Update, uniform_edge_bias
from .select import WITH, WITHOUT


@dataclass(frozen=True)
class AlgorithmDescriptor:
    """A named algorithm: callbacks, config overrides and validated parameters.

    ``ooc`` marks algorithms whose selections only need the neighbor list of
    the frontier vertex itself, which is what partitioned execution can serve.
    ``walk`` algorithms measure their length with ``depth``.
    """

    name: str
    spec: BiasSpec
    overrides: dict[str, Any] = field(default_factory=dict)
    params: dict[str, float] = field(default_factory=dict)
    ooc: bool = True
    walk: bool = False
    seeds_per_instance: int = 1

    def configure(self, base: SamplingConfig | None = None, **kwargs) -> SamplingConfig:
        """Apply the algorithm's overrides on top of ``base`` and ``kwargs``."""
        cfg = base if base is not None else SamplingConfig()
        cfg = replace(cfg, **kwargs)
        return replace(cfg, **self.overrides)


def _probability(name, value) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")
    return value


def _positive(name, value) -> float:
    value = float(value)
    if not value > 0.0:
        raise ValueError(f"{name} must be > 0, got {value}")
    return value


def degree_bias(batch: EdgeBatch) -> np.ndarray:
    return batch.target_degree.astype(np.float64)


def weight_bias(batch: EdgeBatch) -> np.ndarray:
    return batch.weight


def vertex_degree_bias(graph, vertices) -> np.ndarray:
    return graph.degrees[vertices].astype(np.float64)


_EDGE_BIASES = {"degree": degree_bias, "weight": weight_bias, "uniform": uniform_edge_bias}


def _edge_bias(bias: str):
    # every named bias reads only the edge itself
    try:
        return _EDGE_BIASES[bias]
    except KeyError:
        raise ValueError(f"unknown bias {bias!r}; choose from {sorted(_EDGE_BIASES)}") from None


def unbiased_neighbor_sampling() -> AlgorithmDescriptor:
    return AlgorithmDescriptor("neighbor-unbiased", BiasSpec(), {"mode": WITHOUT, "pool_scope": "vertex"})


def biased_neighbor_sampling(bias: str = "degree") -> AlgorithmDescriptor:
    return AlgorithmDescriptor(
        "neighbor-biased", BiasSpec(edge_bias=_edge_bias(bias)), {"mode": WITHOUT, "pool_scope": "vertex"}
    )


def burn_counts(p_f: float):
    """Neighbor-count rule: failures before the first success of a Bernoulli(1 - p_f)."""

    def rule(pool_sizes: np.ndarray, u: np.ndarray) -> np.ndarray:
        if p_f <= 0.0:
            return np.zeros_like(pool_sizes)
        if p_f >= 1.0:
            return pool_sizes.copy()
        x = np.floor(np.log1p(-u) / np.log(p_f))
        return np.minimum(x, pool_sizes).astype(np.int64)

    return rule


def forest_fire_sampling(p_f: float = 0.7) -> AlgorithmDescriptor:
    p_f = _probability("p_f", p_f)
    return AlgorithmDescriptor(
        "forest-fire", BiasSpec(),
        {"mode": WITHOUT, "pool_scope": "vertex", "neighbor_size": burn_counts(p_f)},
        {"p_f": p_f},
    )


def snowball_sampling() -> AlgorithmDescriptor:
    return AlgorithmDescriptor(
        "snowball", BiasSpec(), {"mode": WITHOUT, "pool_scope": "vertex", "neighbor_size": None}
    )


def layer_sampling(bias: str = "degree") -> AlgorithmDescriptor:
    return AlgorithmDescriptor(
        "layer", BiasSpec(edge_bias=_edge_bias(bias)), {"mode": WITHOUT, "pool_scope": "layer"}, ooc=False
    )


_WALK = {"mode": WITH, "pool_scope": "vertex", "neighbor_size": 1, "frontier_size": None}


def simple_random_walk() -> AlgorithmDescriptor:
    return AlgorithmDescriptor("simple-rw", BiasSpec(static_edge_bias=True), dict(_WALK), walk=True)


def biased_random_walk(bias: str = "degree") -> AlgorithmDescriptor:
    return AlgorithmDescriptor(
        "biased-rw", BiasSpec(edge_bias=_edge_bias(bias), static_edge_bias=True), dict(_WALK), walk=True
    )


def _mh_update(batch: EdgeBatch, draw) -> Update:
    du = batch.target_degree.astype(np.float64)
    dv = batch.source_degree.astype(np.float64)
    ratio = np.divide(dv, du, out=np.full(du.shape, np.inf), where=du > 0)
    accept = draw(0) < np.minimum(1.0, ratio)
    vertex = np.where(accept, batch.target, batch.source)
    kind = np.where(accept, Kind.EDGE, Kind.STAY)
    return Update(vertex, kind)


def metropolis_hastings_random_walk() -> AlgorithmDescriptor:
    """Uniform proposal, accepted with ``min(1, deg(v) / deg(u))``; rejection stays put."""
    return AlgorithmDescriptor("mh-rw", BiasSpec(update=_mh_update, static_edge_bias=True), dict(_WALK), walk=True)


def random_walk_with_jump(p_jump: float = 0.15) -> AlgorithmDescriptor:
    p_jump = _probability("p_jump", p_jump)

    def update(batch: EdgeBatch, draw) -> Update:
        jump = draw(0) < p_jump
        n = batch.graph.vertex_count
        dest = np.minimum((draw(1) * n).astype(np.int64), n - 1)
        return Update(np.where(jump, dest, batch.target), np.where(jump, Kind.JUMP, Kind.EDGE))

    return AlgorithmDescriptor(
        "rw-jump", BiasSpec(update=update, static_edge_bias=True), dict(_WALK), {"p_jump": p_jump}, walk=True
    )


def random_walk_with_restart(p_restart: float = 0.15, anchor: int | None = None) -> AlgorithmDescriptor:
    """Teleport to ``anchor`` (default: the instance's seed) with probability ``p_restart``."""
    p_restart = _probability("p_restart", p_restart)
    params = {"p_restart": p_restart}
    if anchor is not None:
        anchor = int(anchor)
        params["anchor"] = anchor

    def update(batch: EdgeBatch, draw) -> Update:
        restart = draw(0) < p_restart
        dest = batch.anchor if anchor is None else np.full(len(batch), anchor, dtype=np.int64)
        return Update(np.where(restart, dest, batch.target), np.where(restart, Kind.RESTART, Kind.EDGE))

    return AlgorithmDescriptor(
        "rw-restart", BiasSpec(update=update, static_edge_bias=True), dict(_WALK), params, walk=True
    )


def multidimensional_random_walk(pool_size: int = 2) -> AlgorithmDescriptor:
    """Frontier sampling: pick one pool vertex by degree, replace it with a uniform neighbor."""
    if pool_size < 1:
        raise ValueError("pool_size must be >= 1")
    overrides = dict(_WALK, frontier_size=1)
    return AlgorithmDescriptor(
        "multi-rw", BiasSpec(vertex_bias=vertex_degree_bias), overrides, {"pool_size": pool_size},
        ooc=False, walk=True, seeds_per_instance=pool_size,
    )


def node2vec_bias(p: float, q: float):
    inv_p, inv_q = 1.0 / p, 1.0 / q

    def edge_bias(batch: EdgeBatch) -> np.ndarray:
        prev = batch.previous
        has_prev = prev >= 0
        alpha = np.ones(len(batch))
        if has_prev.any():
            back = has_prev & (batch.target == prev)
            near = has_prev & ~back & batch.graph.has_edge(np.where(has_prev, prev, 0), batch.target)
            alpha = np.where(back, inv_p, np.where(near, 1.0, np.where(has_prev, inv_q, 1.0)))
        return batch.weight * alpha

    return edge_bias


def node2vec(p: float = 1.0, q: float = 1.0) -> AlgorithmDescriptor:
    p, q = _positive("p", p), _positive("q", q)
    return AlgorithmDescriptor(
        "node2vec", BiasSpec(edge_bias=node2vec_bias(p, q)), dict(_WALK), {"p": p, "q": q}, ooc=False, walk=True
    )


REGISTRY = {
    "neighbor-unbiased": unbiased_neighbor_sampling,
    "neighbor-biased": biased_neighbor_sampling,
    "forest-fire": forest_fire_sampling,
    "snowball": snowball_sampling,
    "layer": layer_sampling,
    "simple-rw": simple_random_walk,
    "biased-rw": biased_random_walk,
    "mh-rw": metropolis_hastings_random_walk,
    "rw-jump": random_walk_with_jump,
    "rw-restart": random_walk_with_restart,
    "multi-rw": multidimensional_random_walk,
    "node2vec": node2vec,
}


def make(name: str, **params) -> AlgorithmDescriptor:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown algorithm {name!r}; available: {', '.join(REGISTRY)}") from None
    return factory(**params)
