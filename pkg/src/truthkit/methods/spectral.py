"""Spectral methods over the semantic affinity graph.

All three consume the symmetric normalized Laplacian
L = I - D^{-1/2} W D^{-1/2} with D = diag(row sums of W). Row sums are
positive because the diagonal of W is 1, so the normalization is total.
"""

from __future__ import annotations

import numpy as np

from ..backends.entailment import EntailmentProvider
from ..errors import MethodFailure
from ..types import SamplePool, TruthScore, last_user_content
from .semantic import SemanticGraph, _SamplingMethod, build_affinity


def normalized_laplacian(graph: SemanticGraph) -> np.ndarray:
    w = graph.affinity
    d_inv_sqrt = 1.0 / np.sqrt(w.sum(axis=1))
    lap = np.eye(graph.size) - (d_inv_sqrt[:, None] * w) * d_inv_sqrt[None, :]
    return (lap + lap.T) / 2.0  # keep eigh's input exactly symmetric


def laplacian_spectrum(graph: SemanticGraph) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending, all within [0, 2]) and eigenvectors of L."""
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(normalized_laplacian(graph))
    except np.linalg.LinAlgError as exc:
        raise MethodFailure(f"eigendecomposition did not converge: {exc}") from exc
    return eigenvalues, eigenvectors


def eccentricity(graph: SemanticGraph, k: int, target_index: int = 0) -> TruthScore:
    """Distance of the target's spectral embedding from the pool centroid.

    Rows of the k smallest-eigenvalue eigenvectors embed the samples; offsets
    are the centered row norms, and the score is the negated target offset.
    Offsets are invariant to basis rotation inside degenerate eigenspaces, but
    a k that cuts through a degenerate band makes the embedding basis-dependent.
    """
    m = graph.size
    if not 1 <= k <= m:
        raise ValueError(f"k must lie in [1, {m}], got {k}")
    _, eigenvectors = laplacian_spectrum(graph)
    embedding = eigenvectors[:, :k]
    centered = embedding - embedding.mean(axis=0)
    offsets = np.linalg.norm(centered, axis=1)
    return TruthScore(
        "eccentricity",
        -float(offsets[target_index]),
        details={
            "offsets": [float(o) for o in offsets],
            "total_uncertainty": float(np.linalg.norm(centered)),
            "k": k,
        },
    )


def matrix_degree(graph: SemanticGraph, target_index: int = 0) -> TruthScore:
    """Per-sample agreement: the target's affinity row sum over the pool size.

    Overall uncertainty U = trace(m*I - D) / m^2 is 0 exactly when every pair
    fully agrees and grows as the graph thins.
    """
    m = graph.size
    degrees = graph.affinity.sum(axis=1)
    confidences = degrees / m
    uncertainty = float((m * m - degrees.sum()) / (m * m))
    return TruthScore(
        "matrix_degree",
        float(confidences[target_index]),
        details={
            "confidences": [float(c) for c in confidences],
            "uncertainty": uncertainty,
        },
    )


def kernel_language_entropy(graph: SemanticGraph, t: float = 0.3) -> TruthScore:
    """Von Neumann entropy of the normalized heat kernel exp(-t L).

    The kernel's eigenvalues are exp(-t * lambda_i); normalizing by the trace
    gives a unit-trace density whose entropy is -sum(mu * ln mu).
    """
    if t <= 0:
        raise ValueError("diffusion time t must be > 0")
    eigenvalues, _ = laplacian_spectrum(graph)
    kernel_eigs = np.exp(-t * eigenvalues)
    trace = kernel_eigs.sum()
    mu = kernel_eigs / trace
    vne = float(-np.sum(mu * np.log(mu)))
    return TruthScore(
        "kernel_language_entropy",
        -vne,
        details={"vne": vne, "t": t, "kernel_trace": float(trace)},
    )


class _GraphMethod(_SamplingMethod):
    def _graph(self, messages, pool: SamplePool) -> SemanticGraph:
        sub = self._need_pool(pool)
        return build_affinity(last_user_content(messages), sub, self.entailment)


class Eccentricity(_GraphMethod):
    method_id = "eccentricity"

    def __init__(
        self,
        num_samples: int = 5,
        k: int | None = None,
        entailment: EntailmentProvider | None = None,
    ):
        super().__init__(num_samples=num_samples, entailment=entailment)
        self.k = k

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        graph = self._graph(messages, pool)
        k = self.k if self.k is not None else min(graph.size, 2)
        score = eccentricity(graph, k, target_index=0)
        score.method_id = self.method_id
        score.details.update(self._pool_details(pool.take(self.num_samples)))
        return score


class MatrixDegree(_GraphMethod):
    method_id = "matrix_degree"

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        graph = self._graph(messages, pool)
        score = matrix_degree(graph, target_index=0)
        score.method_id = self.method_id
        score.details.update(self._pool_details(pool.take(self.num_samples)))
        return score


class KernelLanguageEntropy(_GraphMethod):
    method_id = "kernel_language_entropy"

    def __init__(
        self,
        num_samples: int = 5,
        t: float = 0.3,
        entailment: EntailmentProvider | None = None,
    ):
        super().__init__(num_samples=num_samples, entailment=entailment)
        self.t = t

    def _score(self, messages, record, handle, config, pool) -> TruthScore:
        graph = self._graph(messages, pool)
        score = kernel_language_entropy(graph, self.t)
        score.method_id = self.method_id
        score.details.update(self._pool_details(pool.take(self.num_samples)))
        return score
