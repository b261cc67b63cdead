"""Pure-NumPy implementation of the hot kernel-sum primitive.

Same contract as the compiled extension in ``_kernel_ext``: given two stacked
atom-feature matrices with frame offsets and species ids, return the raw
double sums of the base kernel over every frame pair, both in total and
restricted to same-species pairs.
"""

from __future__ import annotations

import numpy as np

KIND_LINEAR = 0
KIND_GAUSSIAN = 1


def _atom_kernel(xq: np.ndarray, xt: np.ndarray, kind: int, sigma: float) -> np.ndarray:
    if kind == KIND_LINEAR:
        return xq @ xt.T
    sq = np.sum(xq * xq, axis=1)
    st = np.sum(xt * xt, axis=1)
    d2 = sq[:, None] + st[None, :] - 2.0 * (xq @ xt.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * sigma * sigma))


def frame_kernel_sums(
    xq: np.ndarray,
    qoff: np.ndarray,
    qspecies: np.ndarray,
    xt: np.ndarray,
    toff: np.ndarray,
    tspecies: np.ndarray,
    n_species: int,
    kind: int,
    sigma: float,
    symmetric: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Raw kernel sums per frame pair.

    Returns ``(total, per_species)`` with shapes (Q, T) and (S, Q, T), where
    ``total[a, b]`` sums k(h_i, h_j) over all atoms i of query frame a and j
    of train frame b, and ``per_species[s - 1, a, b]`` restricts the sum to
    pairs whose atoms both have species id s. With ``symmetric=True`` the two
    inputs must be identical; the lower triangle is overwritten by the mirror
    of the upper one, so the outputs are exactly symmetric.
    """
    nq = qoff.shape[0] - 1
    nt = toff.shape[0] - 1
    k_atoms = _atom_kernel(xq, xt, kind, sigma)

    # Frame indicator matrices turn atom-pair sums into frame-pair sums.
    iq = np.zeros((nq, xq.shape[0]))
    for a in range(nq):
        iq[a, qoff[a] : qoff[a + 1]] = 1.0
    if symmetric:
        it = iq
    else:
        it = np.zeros((nt, xt.shape[0]))
        for b in range(nt):
            it[b, toff[b] : toff[b + 1]] = 1.0

    total = iq @ k_atoms @ it.T
    per_species = np.zeros((n_species, nq, nt))
    for s in range(1, n_species + 1):
        iq_s = iq * (qspecies == s)[None, :]
        it_s = it * (tspecies == s)[None, :]
        per_species[s - 1] = iq_s @ k_atoms @ it_s.T

    if symmetric:
        idx_u = np.triu_indices(nq, k=1)
        total[(idx_u[1], idx_u[0])] = total[idx_u]
        for s in range(n_species):
            per_species[s][(idx_u[1], idx_u[0])] = per_species[s][idx_u]
    return total, per_species
