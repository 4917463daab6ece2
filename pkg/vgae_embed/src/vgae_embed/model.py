"""Two-layer GCN variational graph auto-encoder with mean readout.

Encoder: GCN(1 -> 32) with ReLU, then two parallel GCN(32 -> 16) heads for
the node-latent means and log standard deviations; decoder is the inner
product of sampled latents through a sigmoid. The single node input feature
is the (raw) degree. Training is full batch — every graph contributes to
each optimizer step — with Adam at learning rate 0.01 for 100 epochs.

Exported graph embeddings are the mean over node latent MEANS (mu), not
sampled latents, so exports are deterministic and permutation-invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import torch

from .io import Graph, VgaeInputError

HIDDEN_DIM = 32
LATENT_DIM = 16
LEARNING_RATE = 0.01
EPOCHS = 100


def _normalized_adjacency(adj: np.ndarray) -> torch.Tensor:
    """Symmetric GCN propagation matrix D~^{-1/2} (A + I) D~^{-1/2}."""
    a_tilde = adj + np.eye(adj.shape[0])
    inv_sqrt_deg = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    norm = a_tilde * inv_sqrt_deg[:, None] * inv_sqrt_deg[None, :]
    return torch.tensor(norm, dtype=torch.float64)


class _Encoder(torch.nn.Module):
    def __init__(self):
        super().__init__()
        self.w_hidden = torch.nn.Linear(1, HIDDEN_DIM, bias=False).double()
        self.w_mu = torch.nn.Linear(HIDDEN_DIM, LATENT_DIM, bias=False).double()
        self.w_logstd = torch.nn.Linear(HIDDEN_DIM, LATENT_DIM, bias=False).double()

    def forward(self, norm_adj: torch.Tensor, features: torch.Tensor):
        hidden = torch.relu(norm_adj @ self.w_hidden(features))
        mu = norm_adj @ self.w_mu(hidden)
        logstd = norm_adj @ self.w_logstd(hidden)
        return mu, logstd


@dataclass
class VgaeModel:
    encoder: _Encoder
    loss_history: list[float] = field(default_factory=list)
    kl_history: list[float] = field(default_factory=list)

    def node_latent_means(self, graph: Graph) -> np.ndarray:
        adj = graph.adjacency()
        features = torch.tensor(adj.sum(axis=1, keepdims=True), dtype=torch.float64)
        with torch.no_grad():
            mu, _ = self.encoder(_normalized_adjacency(adj), features)
        return mu.numpy()

    def graph_embedding(self, graph: Graph) -> np.ndarray:
        return self.node_latent_means(graph).mean(axis=0)


def _graph_loss(encoder: _Encoder, graph: Graph,
                generator: torch.Generator) -> tuple[torch.Tensor, torch.Tensor]:
    adj = graph.adjacency()
    n = graph.n
    target = torch.tensor(adj, dtype=torch.float64)
    features = torch.tensor(adj.sum(axis=1, keepdims=True), dtype=torch.float64)
    mu, logstd = encoder(_normalized_adjacency(adj), features)
    noise = torch.randn(mu.shape, generator=generator, dtype=torch.float64)
    z = mu + noise * torch.exp(logstd)
    logits = z @ z.T
    # reweight present edges so sparse graphs do not collapse to "no edge"
    n_edges = float(target.sum())
    pos_weight = (n * n - n_edges) / max(n_edges, 1.0)
    recon = torch.nn.functional.binary_cross_entropy_with_logits(
        logits, target, pos_weight=torch.tensor(pos_weight, dtype=torch.float64))
    kl = -0.5 / n * torch.sum(1 + 2 * logstd - mu.pow(2) - torch.exp(2 * logstd))
    return recon, kl


def train_vgae(graphs: Sequence[Graph], seed: int,
               epochs: int = EPOCHS) -> VgaeModel:
    """Full-batch training: one Adam step per epoch over the summed loss."""
    if not graphs:
        raise VgaeInputError("cannot train on an empty graph list")
    torch.manual_seed(seed)
    encoder = _Encoder()
    generator = torch.Generator().manual_seed(seed + 1)
    opt = torch.optim.Adam(encoder.parameters(), lr=LEARNING_RATE)
    model = VgaeModel(encoder=encoder)
    for _epoch in range(epochs):
        opt.zero_grad()
        total = torch.tensor(0.0, dtype=torch.float64)
        total_kl = 0.0
        for graph in graphs:
            recon, kl = _graph_loss(encoder, graph, generator)
            total = total + recon + kl
            total_kl += float(kl.detach())
        total = total / len(graphs)
        total.backward()
        opt.step()
        model.loss_history.append(float(total.detach()))
        model.kl_history.append(total_kl / len(graphs))
    return model


def embed_graphs(model: VgaeModel, graphs: Sequence[Graph]) -> dict[str, np.ndarray]:
    return {g.instance_id: model.graph_embedding(g) for g in graphs}
