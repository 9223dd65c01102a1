"""Hamilton cycle packing of pseudorandom graphs by rotation and extension."""

from hampack.graph import Graph, DiGraph, BipartiteGraph, gen_gnp, split_layers, read_graph, write_graph
from hampack.pipeline import Packing, PipelineParams, run_full
from hampack.verify import VerifyReport, verify_packing

__all__ = [
    "Graph",
    "DiGraph",
    "BipartiteGraph",
    "gen_gnp",
    "split_layers",
    "read_graph",
    "write_graph",
    "Packing",
    "PipelineParams",
    "run_full",
    "VerifyReport",
    "verify_packing",
]
