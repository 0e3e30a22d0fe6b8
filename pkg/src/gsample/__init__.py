"""Bias-centric graph sampling and random walks with out-of-memory scheduling."""

from .algorithms import REGISTRY, AlgorithmDescriptor, make
from .framework import BiasSpec, EdgeBatch, Kind, SampleOutput, SamplingConfig, Update, run
from .graph import CsrGraph, PartitionSet, load_edge_list, load_graph, partition
from .rng import instance_rng

__all__ = [
    "REGISTRY",
    "AlgorithmDescriptor",
    "BiasSpec",
    "CsrGraph",
    "EdgeBatch",
    "Kind",
    "PartitionSet",
    "SampleOutput",
    "SamplingConfig",
    "Update",
    "instance_rng",
    "load_edge_list",
    "load_graph",
    "make",
    "partition",
    "run",
]
