"""Two-class spectral clustering of trajectory kernel matrices.

The kernel matrix is rescaled into [0, 1], treated as a graph affinity, and
split by the sign of the Fiedler vector of the symmetric normalized
Laplacian. A sign split is deterministic and is all a two-state trajectory
(reactant vs product segments) needs.
"""

from __future__ import annotations

import numpy as np

from .errors import NotSymmetric

_ZERO_TOL = 1e-12


def kernel_heatmap_normalize(g: np.ndarray) -> np.ndarray:
    """Affine rescale of a kernel matrix into [0, 1].

    A constant matrix maps to all 0.5 (degenerate range).
    """
    g = np.asarray(g, dtype=np.float64)
    lo, hi = float(g.min()), float(g.max())
    if hi == lo:
        return np.full_like(g, 0.5)
    return (g - lo) / (hi - lo)


def spectral_bipartition(g: np.ndarray) -> np.ndarray:
    """Length-T 0/1 labels from the sign split of the Fiedler vector.

    The affinity is the heatmap-normalized kernel matrix, the Laplacian is
    the symmetric normalized one, and labels are canonicalized so index 0
    gets label 0. Entries of the Fiedler vector within 1e-12 of zero join
    class 0 before canonicalization. Invariant to positive affine rescaling
    of the input, since the normalization absorbs it.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {g.shape}")
    t = g.shape[0]
    if t < 2:
        raise NotSymmetric("need at least 2 frames to bipartition")
    scale = max(1.0, float(np.abs(g).max()))
    if float(np.abs(g - g.T).max()) > 1e-10 * scale:
        raise NotSymmetric("kernel matrix is not symmetric")

    affinity = kernel_heatmap_normalize(0.5 * (g + g.T))
    degrees = affinity.sum(axis=1)
    inv_sqrt = np.zeros(t)
    connected = degrees > 0
    inv_sqrt[connected] = 1.0 / np.sqrt(degrees[connected])
    lap = np.eye(t) - (inv_sqrt[:, None] * affinity) * inv_sqrt[None, :]

    _, vecs = np.linalg.eigh(lap)
    # The trivial bottom eigenvector of the normalized Laplacian is
    # D^(1/2) 1. Projecting it out of the low eigenvectors keeps the split
    # well defined even when the graph is disconnected and the bottom
    # eigenvalue is degenerate.
    trivial = np.sqrt(np.maximum(degrees, 0.0))
    norm = np.linalg.norm(trivial)
    if norm > 0:
        trivial = trivial / norm
    fiedler = None
    for col in (1, 0):
        cand = vecs[:, col]
        if norm > 0:
            cand = cand - trivial * (trivial @ cand)
        mag = np.linalg.norm(cand)
        if mag > 1e-8:
            fiedler = cand / mag
            break
    if fiedler is None:
        fiedler = vecs[:, 1]

    labels = (fiedler > _ZERO_TOL).astype(np.int64)
    if labels[0] == 1:
        labels = 1 - labels
    return labels
