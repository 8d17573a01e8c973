"""Lipschitz embeddings of lattices into site percolation: constructions,
certificates, exact search and seeded Monte Carlo drivers."""

from .lattice import (NEG_INF, POS_INF, UNCOLOURED, STAR, NEAREST, AdjacencySpec, ClusterReport,
                      Colouring, WindowSpec, cluster_decompose, l1_dist, linf_dist)
from .percolation import CellGeometry, Configuration, mix_seed, sample_config

__version__ = "0.1.0"
