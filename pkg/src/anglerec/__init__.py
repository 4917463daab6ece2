"""Clustering-based QAOA angle recommendation toolkit.

Builds a database of BFGS-optimized QAOA angles over generated MaxCut/QUBO
benchmarks, clusters angle values or instance encodings to recommend K
angle vectors for unseen instances, evaluates the recommendations under
cross-validation and a train-small/test-big split, and demonstrates them
inside Recursive-QAOA under a fixed per-iteration circuit-call budget.
"""

__version__ = "0.1.0"
