"""Classify observables into the structural classes the impossibility results sort by.

Flags are decided numerically: an eigenvalue counts as 0 or 1 when it sits
within rank_threshold of it (relative to max(1, largest eigenvalue)), and
eigenvalue multiplicities are detected with cluster_gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Observable
from .errors import NotCommutative
from .linalg import DEFAULT_TOL, Tolerances, eigenvalue_clusters, hermitian_eig, numerical_rank


@dataclass(frozen=True)
class ObservableClassification:
    is_trivial: bool
    is_sharp: bool
    is_norm1: bool
    is_commutative: bool
    is_small_rank: bool
    is_non_degenerate: bool
    is_completely_unsharp: bool
    per_effect_ranks: tuple[int, ...]
    per_effect_norms: tuple[float, ...]


def _positive_eigenvalues(e: np.ndarray, tol: Tolerances) -> np.ndarray:
    w, _ = hermitian_eig(e, tol)
    cut = tol.rank_threshold * max(1.0, float(w[0]))
    return w[w > cut]


def classify(observable: Observable, tol: Tolerances = DEFAULT_TOL) -> ObservableClassification:
    effects = observable.effects
    d = observable.dim
    atol = tol.atol_equality

    ranks = tuple(numerical_rank(e, tol) for e in effects)
    norms = tuple(float(hermitian_eig(e, tol)[0][0]) for e in effects)

    commutative = all(
        np.abs(a @ b - b @ a).max() <= atol
        for i, a in enumerate(effects)
        for b in effects[i + 1:]
    )
    sharp = all(
        np.abs(a @ b - (a if i == j else 0)).max() <= atol
        for i, a in enumerate(effects)
        for j, b in enumerate(effects)
    )
    trivial = all(
        np.abs(e - (np.trace(e).real / d) * np.eye(d)).max() <= atol for e in effects
    )
    norm1 = all(abs(n - 1.0) <= tol.rank_threshold for n in norms)
    small_rank = any(r == 1 for r in ranks)

    non_degenerate = False
    for e in effects:
        pos = _positive_eigenvalues(e, tol)
        clusters = eigenvalue_clusters(pos, tol.cluster_gap)
        if pos.size and len(clusters) == pos.size:
            non_degenerate = True
            break

    completely_unsharp = all(
        r == d and n < 1.0 - tol.rank_threshold for r, n in zip(ranks, norms)
    )

    return ObservableClassification(
        is_trivial=trivial,
        is_sharp=sharp,
        is_norm1=norm1,
        is_commutative=commutative,
        is_small_rank=small_rank,
        is_non_degenerate=non_degenerate,
        is_completely_unsharp=completely_unsharp,
        per_effect_ranks=ranks,
        per_effect_norms=norms,
    )


@dataclass(frozen=True)
class PostProcessing:
    """E_x = sum_y p(x|y) P_y with sharp base P and column-stochastic p."""

    base: Observable
    matrix: np.ndarray  # shape (outcomes of E, outcomes of base)


def post_processing_decomposition(observable: Observable, tol: Tolerances = DEFAULT_TOL,
                                  rng: np.random.Generator | None = None) -> PostProcessing:
    """Decompose a commutative observable over its joint eigenbasis.

    A random real combination of the effects is diagonalized; if eigenvalue
    collisions leave some effect non-diagonal in that basis, the coefficients
    are resampled (up to 5 attempts).  Basis vectors whose per-effect value
    patterns agree within cluster_gap are merged into one base projection.
    """
    effects = observable.effects
    atol = tol.atol_equality
    for a in effects:
        for b in effects:
            if np.abs(a @ b - b @ a).max() > atol:
                raise NotCommutative("effects do not commute pairwise")

    rng = rng or np.random.default_rng(0)
    d = observable.dim
    v = None
    for _ in range(5):
        coeffs = rng.standard_normal(len(effects))
        mix = sum(c * e for c, e in zip(coeffs, effects))
        _, cand = hermitian_eig(mix, tol)
        off = max(
            np.abs(cand.conj().T @ e @ cand - np.diag(np.diag(cand.conj().T @ e @ cand))).max()
            for e in effects
        )
        if off <= 1e3 * atol:
            v = cand
            break
    if v is None:
        raise NotCommutative("no common eigenbasis found after resampling")

    patterns = np.stack([np.diag(v.conj().T @ e @ v).real for e in effects], axis=0)
    groups: list[list[int]] = []
    for j in range(d):
        for g in groups:
            if np.abs(patterns[:, g[0]] - patterns[:, j]).max() <= tol.cluster_gap:
                g.append(j)
                break
        else:
            groups.append([j])

    projections = []
    p = np.zeros((len(effects), len(groups)))
    for y, g in enumerate(groups):
        cols = v[:, g]
        projections.append(cols @ cols.conj().T)
        p[:, y] = patterns[:, g].mean(axis=1)
    base = Observable(tuple(projections), tuple(f"y{k}" for k in range(len(groups))), tol)
    return PostProcessing(base=base, matrix=p)
