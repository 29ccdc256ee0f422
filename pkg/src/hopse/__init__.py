"""Higher-order positional and structural encodings for combinatorial complexes."""

from .aggregate import HopseEncoder, RankFeatureBundle, aggregate_rank, load_bundle, precompute_bundle, save_bundle
from .complex import Cell, CombinatorialComplex, build_complex, cells_of_rank, is_isomorphic_bruteforce
from .lifting import InputGraph, clique_lift, cycle_lift
from .model import HopseClassifier, HopseModel, HopseRegressor, MlpBlock, grad_check, train
from .neighborhoods import Adjacency, HasseGraph, Incidence, hasse_graph, rank_targeted, taxonomy_set
from .pse import EncodingMatrix, PseKind, encode
from .routes import count_extended_routes, count_minimal_routes, count_neighborhoods, enumerate_minimal_routes

__version__ = "0.1.0"

__all__ = [
    "Adjacency",
    "Cell",
    "CombinatorialComplex",
    "EncodingMatrix",
    "HasseGraph",
    "HopseClassifier",
    "HopseEncoder",
    "HopseModel",
    "HopseRegressor",
    "Incidence",
    "InputGraph",
    "MlpBlock",
    "PseKind",
    "RankFeatureBundle",
    "aggregate_rank",
    "build_complex",
    "cells_of_rank",
    "clique_lift",
    "count_extended_routes",
    "count_minimal_routes",
    "count_neighborhoods",
    "cycle_lift",
    "encode",
    "enumerate_minimal_routes",
    "grad_check",
    "hasse_graph",
    "is_isomorphic_bruteforce",
    "load_bundle",
    "precompute_bundle",
    "rank_targeted",
    "save_bundle",
    "taxonomy_set",
    "train",
]
