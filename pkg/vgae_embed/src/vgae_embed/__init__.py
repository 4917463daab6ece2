"""Variational graph auto-encoder embeddings for unweighted MaxCut graphs.

Consumes the shared instance JSONL format and produces Encoding JSONL with
source=ExternalEmbedding, loadable by downstream recommendation tooling.
"""

from .io import Graph, load_graphs, write_embeddings
from .model import VgaeModel, embed_graphs, train_vgae

__all__ = ["Graph", "VgaeModel", "embed_graphs", "load_graphs",
           "train_vgae", "write_embeddings"]
