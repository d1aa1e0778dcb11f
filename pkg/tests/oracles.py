"""Independent brute-force oracles the implementation is checked against.

Each oracle recomputes its quantity from first principles along a different
path than the library takes, so agreement is evidence and not tautology.
"""

import math
from collections import defaultdict

import numpy as np
import scipy.linalg


def auroc_pairwise(scores, labels):
    """O(n^2) pairwise comparison count with ties worth 0.5."""
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in positives:
        for q in negatives:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(positives) * len(negatives))


def prr_direct(scores, labels):
    """Direct summation of the rejection-curve definition, re-sorting per k."""
    n = len(scores)
    indices = list(range(n))
    by_score = sorted(indices, key=lambda i: (-scores[i], i))
    by_label = sorted(indices, key=lambda i: (-labels[i], i))

    def curve_area(order):
        total = 0.0
        for k in range(n + 1):
            kept = order[: n - k]
            if kept:
                total += sum(1 - labels[i] for i in kept) / len(kept)
        return total / (n + 1)

    base_err = sum(1 - y for y in labels) / n
    area_random = sum(base_err for _ in range(n)) / (n + 1)
    area_method = curve_area(by_score)
    area_oracle = curve_area(by_label)
    return (area_random - area_method) / (area_random - area_oracle)


def isotonic_bruteforce(pairs):
    """Exhaustive monotone-partition least squares; feasible for n <= 10.

    Ties share a group; every contiguous partition of the groups with
    nondecreasing block means is a candidate, and the SSE minimizer equals the
    isotonic fit. Returns {score: fitted value}.
    """
    grouped = defaultdict(list)
    for score, y in pairs:
        grouped[score].append(y)
    scores_sorted = sorted(grouped)
    ys = [grouped[s] for s in scores_sorted]
    num_groups = len(ys)

    best_sse = None
    best_assignment = None
    for mask in range(1 << max(num_groups - 1, 0)):
        blocks = [[0]]
        for i in range(num_groups - 1):
            if (mask >> i) & 1:
                blocks.append([])
            blocks[-1].append(i + 1)
        means = [
            sum(sum(ys[g]) for g in blk) / sum(len(ys[g]) for g in blk) for blk in blocks
        ]
        if any(means[i] > means[i + 1] for i in range(len(means) - 1)):
            continue
        sse = sum(
            (y - means[bi]) ** 2 for bi, blk in enumerate(blocks) for g in blk for y in ys[g]
        )
        if best_sse is None or sse < best_sse - 1e-12:
            best_sse = sse
            best_assignment = (blocks, means)

    fit = {}
    blocks, means = best_assignment
    for bi, blk in enumerate(blocks):
        for g in blk:
            fit[scores_sorted[g]] = means[bi]
    return fit


def dense_laplacian(affinity):
    w = np.asarray(affinity, dtype=float)
    degrees = w.sum(axis=1)
    d_inv_sqrt = np.diag(1.0 / np.sqrt(degrees))
    return np.eye(w.shape[0]) - d_inv_sqrt @ w @ d_inv_sqrt


def vne_bruteforce(affinity, t):
    """Heat-kernel entropy via scipy's matrix exponential, not the eigenpath."""
    lap = dense_laplacian(affinity)
    kernel = scipy.linalg.expm(-t * lap)
    rho = kernel / np.trace(kernel)
    mu = np.linalg.eigvalsh(rho)
    return float(-sum(m * math.log(m) for m in mu if m > 1e-300))


def eccentricity_offsets_bruteforce(affinity, k):
    """Centered row norms of the k smallest-eigenvalue eigenvectors."""
    lap = dense_laplacian(affinity)
    lap = (lap + lap.T) / 2
    _, vecs = np.linalg.eigh(lap)
    emb = vecs[:, :k]
    centered = emb - emb.mean(axis=0)
    return np.linalg.norm(centered, axis=1)


def entropy_bruteforce(masses):
    return -math.fsum(m * math.log(m) for m in masses if m > 0)


def random_affinity(rng, m):
    """A valid affinity: symmetric, unit diagonal, entries in [0, 1]."""
    w = rng.uniform(0.0, 1.0, size=(m, m))
    w = (w + w.T) / 2
    np.fill_diagonal(w, 1.0)
    return w
