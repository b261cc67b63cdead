"""Set kernels over per-atom features.

A configuration is represented by the (normalized) sum of a base kernel's
feature map over its atom rows, which makes the resulting set kernel a double
sum of base-kernel values. The composite kernel blends the whole-set kernel
with the sum of per-species set kernels through the mixing weight alpha:

    K_alpha(H, H') = (1 - alpha) * K(H, H') + alpha * sum_s K(H_s, H'_s)

Gram and cross matrices are assembled from raw frame-pair sums produced by
the selected backend (compiled extension or NumPy fallback).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from . import backend
from .data import FeatureSet
from .errors import DegenerateDistances, DimensionMismatch, EmptyDataset

EXTENSIVE = "extensive"
INTENSIVE = "intensive"

NORM_SUBSET = "subset"
NORM_GLOBAL = "global"


@dataclass(frozen=True)
class BaseKernel:
    """Atom-level kernel: 'gaussian' with length-scale sigma, or 'linear'."""

    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "linear"):
            raise ValueError(f"unknown base kernel {self.kind!r}")
        if self.kind == "gaussian":
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise ValueError(f"gaussian kernel needs finite sigma > 0, got {self.sigma}")

    @property
    def backend_kind(self) -> int:
        return backend.KIND_GAUSSIAN if self.kind == "gaussian" else backend.KIND_LINEAR


def gaussian_kernel(sigma: float) -> BaseKernel:
    return BaseKernel("gaussian", float(sigma))


def linear_kernel() -> BaseKernel:
    return BaseKernel("linear", None)


@dataclass(frozen=True)
class KernelSpec:
    """Base kernel, normalization mode, species mixing weight and count.

    ``species_norm`` picks the normalization constant inside the per-species
    terms in intensive mode: each subset's own size ('subset', default) or
    the full set size ('global', for sensitivity studies).
    """

    base: BaseKernel
    mode: str = EXTENSIVE
    alpha: float = 0.0
    n_species: int = 1
    species_norm: str = NORM_SUBSET

    def __post_init__(self):
        if self.mode not in (EXTENSIVE, INTENSIVE):
            raise ValueError(f"mode must be extensive or intensive, got {self.mode!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.n_species < 1:
            raise ValueError(f"n_species must be >= 1, got {self.n_species}")
        if self.species_norm not in (NORM_SUBSET, NORM_GLOBAL):
            raise ValueError(f"species_norm must be subset or global, got {self.species_norm!r}")

    def with_alpha(self, alpha: float) -> "KernelSpec":
        return replace(self, alpha=float(alpha))

    def with_sigma(self, sigma: float) -> "KernelSpec":
        return replace(self, base=gaussian_kernel(sigma))


def _rows(h) -> np.ndarray:
    feats = h.features if isinstance(h, FeatureSet) else h
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats.reshape(1, -1)
    return feats


def base_kernel_eval(k: BaseKernel, h: np.ndarray, h2: np.ndarray) -> float:
    h = np.asarray(h, dtype=np.float64).reshape(-1)
    h2 = np.asarray(h2, dtype=np.float64).reshape(-1)
    if h.shape != h2.shape:
        raise DimensionMismatch(f"vector dimensions differ: {h.shape[0]} vs {h2.shape[0]}")
    if k.kind == "linear":
        return float(h @ h2)
    d2 = float(np.sum((h - h2) ** 2))
    return float(np.exp(-d2 / (2.0 * k.sigma**2)))


def median_heuristic(
    feature_sets: Sequence[FeatureSet | np.ndarray],
    max_samples: int = 2000,
    seed: int = 0,
) -> float:
    """Median pairwise distance over a subsampled pool of atom rows.

    Rows are pooled across all given feature sets, uniformly subsampled down
    to ``max_samples`` with the fixed seed, and the median of all pairwise
    Euclidean distances in the pool is returned. Deterministic.
    """
    pool = np.vstack([_rows(fs) for fs in feature_sets])
    if pool.shape[0] < 2:
        raise DegenerateDistances("need at least 2 feature rows for the median heuristic")
    if pool.shape[0] > max_samples:
        rng = np.random.default_rng(seed)
        idx = np.sort(rng.choice(pool.shape[0], size=max_samples, replace=False))
        pool = pool[idx]
    med = float(np.median(pdist(pool)))
    if med == 0.0:
        raise DegenerateDistances("median pairwise distance is zero (identical rows)")
    return med


def mean_embedding_kernel(k: BaseKernel, h, h2, mode: str = EXTENSIVE) -> float:
    """Set kernel C_H * C_H' * sum_{i,j} k(h_i, h'_j); 0 if either set is empty."""
    a, b = _rows(h), _rows(h2)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0.0
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatch(f"feature dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    if k.kind == "linear":
        total = float(np.sum(a @ b.T))
    else:
        d2 = (
            np.sum(a * a, axis=1)[:, None]
            + np.sum(b * b, axis=1)[None, :]
            - 2.0 * (a @ b.T)
        )
        np.maximum(d2, 0.0, out=d2)
        total = float(np.sum(np.exp(-d2 / (2.0 * k.sigma**2))))
    if mode == INTENSIVE:
        total /= a.shape[0] * b.shape[0]
    return total


def composite_kernel(spec: KernelSpec, h: FeatureSet, h2: FeatureSet) -> float:
    """K_alpha for a single pair of feature sets."""
    k = cross_kernel_matrix(spec, [h2], [h])
    return float(k[0, 0])


def _stack(sets: Sequence[FeatureSet], n_species: int):
    mats = []
    species = []
    offsets = np.zeros(len(sets) + 1, dtype=np.int64)
    dim = None
    for i, fs in enumerate(sets):
        feats = _rows(fs)
        if dim is None:
            dim = feats.shape[1]
        elif feats.shape[1] != dim:
            raise DimensionMismatch(f"feature dimensions differ: {dim} vs {feats.shape[1]}")
        if not isinstance(fs, FeatureSet):
            raise DimensionMismatch("gram assembly needs FeatureSet inputs with species ids")
        if fs.n_atoms and (fs.species.min() < 1 or fs.species.max() > n_species):
            raise DimensionMismatch(
                f"species ids outside 1..{n_species} in feature set {i}"
            )
        mats.append(feats)
        species.append(fs.species)
        offsets[i + 1] = offsets[i] + feats.shape[0]
    x = np.ascontiguousarray(np.vstack(mats)) if mats else np.zeros((0, 0))
    sp = np.concatenate(species).astype(np.int64) if species else np.zeros(0, dtype=np.int64)
    return x, offsets, sp


def _species_counts(species: np.ndarray, offsets: np.ndarray, n_species: int) -> np.ndarray:
    t = offsets.shape[0] - 1
    counts = np.zeros((t, n_species), dtype=np.int64)
    for a in range(t):
        seg = species[offsets[a] : offsets[a + 1]]
        counts[a] = np.bincount(seg, minlength=n_species + 1)[1:]
    return counts


def _inv_or_zero(counts: np.ndarray) -> np.ndarray:
    out = np.zeros(counts.shape, dtype=np.float64)
    np.divide(1.0, counts, out=out, where=counts > 0)
    return out


def kernel_components(
    spec: KernelSpec,
    query_sets: Sequence[FeatureSet],
    train_sets: Sequence[FeatureSet] | None = None,
    num_threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized whole-set and summed per-species kernel matrices.

    Returns ``(whole, species_sum)``, both of shape (Q, T), such that the
    composite kernel matrix is ``(1 - alpha) * whole + alpha * species_sum``
    for any alpha. ``train_sets=None`` means query x query, assembled exactly
    symmetric. Frame-pair sums are independent, so tiling the query range
    over threads cannot change the result.
    """
    symmetric = train_sets is None
    if len(query_sets) == 0 or (train_sets is not None and len(train_sets) == 0):
        raise EmptyDataset("kernel matrices need at least one feature set per side")
    xq, qoff, qsp = _stack(query_sets, spec.n_species)
    if symmetric:
        xt, toff, tsp = xq, qoff, qsp
    else:
        xt, toff, tsp = _stack(train_sets, spec.n_species)
        if xq.shape[0] and xt.shape[0] and xq.shape[1] != xt.shape[1]:
            raise DimensionMismatch(
                f"query dimension {xq.shape[1]} != train dimension {xt.shape[1]}"
            )

    kind = spec.base.backend_kind
    sigma = spec.base.sigma or 0.0
    nq = len(query_sets)
    nt = toff.shape[0] - 1

    if num_threads > 1 and nq > 1:
        total = np.zeros((nq, nt))
        per_species = np.zeros((spec.n_species, nq, nt))
        chunks = np.array_split(np.arange(nq), min(num_threads, nq))

        def run(chunk):
            lo, hi = chunk[0], chunk[-1] + 1
            coff = (qoff[lo : hi + 1] - qoff[lo]).copy()
            sub_x = xq[qoff[lo] : qoff[hi]]
            sub_sp = qsp[qoff[lo] : qoff[hi]]
            t, p = backend.frame_kernel_sums(
                sub_x, coff, sub_sp, xt, toff, tsp,
                spec.n_species, kind, sigma, False,
            )
            total[lo:hi] = t
            per_species[:, lo:hi] = p

        with ThreadPoolExecutor(max_workers=num_threads) as pool:
            list(pool.map(run, [c for c in chunks if c.size]))
        if symmetric:
            iu = np.triu_indices(nq, k=1)
            total[(iu[1], iu[0])] = total[iu]
            for s in range(spec.n_species):
                per_species[s][(iu[1], iu[0])] = per_species[s][iu]
    else:
        total, per_species = backend.frame_kernel_sums(
            xq, qoff, qsp, xt, toff, tsp,
            spec.n_species, kind, sigma, symmetric,
        )

    counts_q = _species_counts(qsp, qoff, spec.n_species)
    counts_t = counts_q if symmetric else _species_counts(tsp, toff, spec.n_species)
    n_q = counts_q.sum(axis=1)
    n_t = counts_t.sum(axis=1)

    if spec.mode == EXTENSIVE:
        whole = total
        species_sum = per_species.sum(axis=0)
    else:
        cq, ct = _inv_or_zero(n_q), _inv_or_zero(n_t)
        whole = total * cq[:, None] * ct[None, :]
        species_sum = np.zeros_like(whole)
        for s in range(spec.n_species):
            if spec.species_norm == NORM_SUBSET:
                cqs = _inv_or_zero(counts_q[:, s])
                cts = _inv_or_zero(counts_t[:, s])
            else:
                cqs, cts = cq, ct
            species_sum += per_species[s] * cqs[:, None] * cts[None, :]
    if symmetric:
        # Normalization factors multiply in a different order above and below
        # the diagonal, which can differ by an ulp; mirror the final values.
        iu = np.triu_indices(nq, k=1)
        whole[(iu[1], iu[0])] = whole[iu]
        species_sum[(iu[1], iu[0])] = species_sum[iu]
    return whole, species_sum


def combine_alpha(whole: np.ndarray, species_sum: np.ndarray, alpha: float) -> np.ndarray:
    return (1.0 - alpha) * whole + alpha * species_sum


def gram_matrix(
    spec: KernelSpec, sets: Sequence[FeatureSet], num_threads: int = 1
) -> np.ndarray:
    """T x T composite-kernel matrix, exactly symmetric by construction."""
    whole, species_sum = kernel_components(spec, sets, None, num_threads)
    return combine_alpha(whole, species_sum, spec.alpha)


def cross_kernel_matrix(
    spec: KernelSpec,
    train_sets: Sequence[FeatureSet],
    query_sets: Sequence[FeatureSet],
    num_threads: int = 1,
) -> np.ndarray:
    """Q x T matrix with entry (q, t) = K_alpha(query_q, train_t)."""
    whole, species_sum = kernel_components(spec, query_sets, train_sets, num_threads)
    return combine_alpha(whole, species_sum, spec.alpha)
