"""Fixed-point spaces of instrument duals and their factor decomposition.

The fixed points of the dual total map of an instrument form a
unital *-closed operator space; for the schemes this package certifies
it is an algebra and splits as a direct sum of factors
L(K_alpha) (x) 1_{R_alpha}.  The splitting is computed numerically:
minimal central projections from eigenvalue clustering of a generic
central element, partial isometries from polar decompositions of a
generic off-block compression, and a factorizer isometry
W_alpha : K_alpha (x) R_alpha -> range(P_alpha) assembled from them.

All random draws come from one seeded generator so results reproduce.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

from .core import Instrument, Observable, State
from .errors import DecompositionMismatch, DegenerateCenter, NotAnAlgebra
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    dagger,
    eigenvalue_clusters,
    hermitian_eig,
    hermitianize,
    hs_inner,
    hs_norm,
    kernel_basis,
    kron,
    partial_trace,
    unvec,
    vec,
)
from .thirdlaw import cesaro_average

PRODUCT_RESIDUAL = 1e-7
RECONSTRUCTION_LIMIT = 1e-6


# ---------------------------------------------------------------------------
# Hermitian bases for *-closed spans


def _embed_hermitian(h: np.ndarray) -> np.ndarray:
    """Isometry from Hermitian matrices onto R^(d*d) for real orthonormalization."""
    d = h.shape[0]
    iu = np.triu_indices(d, k=1)
    return np.concatenate([
        np.diag(h).real,
        np.sqrt(2.0) * h[iu].real,
        np.sqrt(2.0) * h[iu].imag,
    ])


def _unembed_hermitian(x: np.ndarray, d: int) -> np.ndarray:
    iu = np.triu_indices(d, k=1)
    n_off = iu[0].size
    h = np.diag(x[:d]).astype(np.complex128)
    upper = (x[d:d + n_off] + 1j * x[d + n_off:]) / np.sqrt(2.0)
    h[iu] = upper
    h[(iu[1], iu[0])] = upper.conj()
    return h


def hermitian_basis(mats, dim: int, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    """HS-orthonormal Hermitian basis of the *-closed complex span of mats."""
    rows = []
    for m in mats:
        rows.append(_embed_hermitian(hermitianize(m)))
        rows.append(_embed_hermitian((m - dagger(m)) / 2j))
    a = np.stack(rows, axis=0)
    _, s, vh = np.linalg.svd(a, full_matrices=False)
    cut = tol.kernel_threshold * max(1.0, float(s[0]) if s.size else 0.0)
    return tuple(_unembed_hermitian(vh[i], dim) for i in range(s.size) if s[i] > cut)


@dataclass(frozen=True)
class OperatorSubspace:
    """Complex operator span given by an HS-orthonormal Hermitian basis."""

    dim: int
    basis: tuple[np.ndarray, ...]

    def project(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for b in self.basis:
            out += hs_inner(b, x) * b
        return out

    def __len__(self) -> int:
        return len(self.basis)


def fixed_point_space(instrument: Instrument, tol: Tolerances = DEFAULT_TOL) -> OperatorSubspace:
    """Kernel of (dual total superoperator - id), as Hermitian basis matrices."""
    d = instrument.dim
    s = instrument.total_channel().dual_superoperator
    null = kernel_basis(s - np.eye(d * d), tol)
    mats = [unvec(null[:, j], d) for j in range(null.shape[1])]
    basis = hermitian_basis(mats, d, tol)
    if len(basis) != null.shape[1]:
        raise NotAnAlgebra("fixed-point span is not adjoint-closed within tolerance")
    return OperatorSubspace(d, basis)


def verify_algebra(space: OperatorSubspace, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Contains identity, adjoint-closed, and closed under products (residual < 1e-7)."""
    eye = np.eye(space.dim, dtype=np.complex128)
    if hs_norm(eye - space.project(eye)) > PRODUCT_RESIDUAL * space.dim:
        return False
    for b in space.basis:
        if hs_norm(dagger(b) - space.project(dagger(b))) > PRODUCT_RESIDUAL:
            return False
    for a in space.basis:
        for b in space.basis:
            prod = a @ b
            if hs_norm(prod - space.project(prod)) > PRODUCT_RESIDUAL:
                return False
    return True


# ---------------------------------------------------------------------------
# factor decomposition


@dataclass(frozen=True)
class FactorBlock:
    """One summand L(K) (x) 1_R of the fixed-point algebra.

    factorizer maps K (x) R isometrically onto range(projection); omega is
    the block environment state of the Cesaro-averaged instrument, in the
    factorizer's R coordinates (chosen to make omega diagonal descending).
    """

    projection: np.ndarray
    dim_k: int
    dim_r: int
    factorizer: np.ndarray
    omega: State


@dataclass(frozen=True)
class FactorDecomposition:
    space: OperatorSubspace
    blocks: tuple[FactorBlock, ...]
    reconstruction_residual: float

    def block_units(self) -> list[np.ndarray]:
        """Images W (e_ij (x) 1_R) W^dag spanning the reconstructed algebra."""
        out = []
        for blk in self.blocks:
            for i in range(blk.dim_k):
                for j in range(blk.dim_k):
                    unit = np.zeros((blk.dim_k, blk.dim_k), dtype=np.complex128)
                    unit[i, j] = 1.0
                    out.append(blk.factorizer @ kron(unit, np.eye(blk.dim_r)) @ dagger(blk.factorizer))
        return out


def subspace_distance(mats_a, mats_b, dim: int) -> float:
    """Spectral distance between orthogonal projectors onto two operator spans."""
    def projector(mats):
        a = np.stack([vec(m) for m in mats], axis=0)
        _, s, vh = np.linalg.svd(a, full_matrices=False)
        cut = 1e-10 * max(1.0, float(s[0]))
        q = vh[s > cut]
        return q.conj().T @ q
    return float(np.linalg.norm(projector(mats_a) - projector(mats_b), 2))


def _center_basis(space: OperatorSubspace, tol: Tolerances) -> tuple[np.ndarray, ...]:
    """Hermitian basis of the center: elements commuting with every basis matrix."""
    m = len(space.basis)
    rows = []
    for b in space.basis:
        cols = [vec(c @ b - b @ c) for c in space.basis]
        rows.append(np.stack(cols, axis=1))
    commutator_map = np.concatenate(rows, axis=0)  # (m*d^2, m)
    coeff = kernel_basis(commutator_map, tol)
    elements = []
    for j in range(coeff.shape[1]):
        z = np.zeros((space.dim, space.dim), dtype=np.complex128)
        for k in range(m):
            z += coeff[k, j] * space.basis[k]
        elements.append(z)
    return hermitian_basis(elements, space.dim, tol)


def _minimal_central_projections(center: tuple[np.ndarray, ...], space: OperatorSubspace,
                                 tol: Tolerances, rng: np.random.Generator) -> list[np.ndarray]:
    """Cluster the spectrum of a generic central element; one projection per block."""
    z = len(center)
    for _ in range(5):
        g = rng.standard_normal(z)
        x = sum(gi * h for gi, h in zip(g, center))
        w, v = hermitian_eig(x, tol)
        clusters = eigenvalue_clusters(w, tol.cluster_gap)
        if len(clusters) != z:
            continue
        return [v[:, idx] @ v[:, idx].conj().T for idx in clusters]
    raise DegenerateCenter(f"could not separate {z} blocks after resampling")


def _block_factorizer(proj: np.ndarray, block_basis: tuple[np.ndarray, ...], dim_k: int,
                      dim_r: int, tol: Tolerances, rng: np.random.Generator) -> np.ndarray:
    """Isometry W with W^dag B W = B_K (x) 1_R for every block algebra element B."""
    d = proj.shape[0]
    rank = dim_k * dim_r
    for _ in range(5):
        g = rng.standard_normal(len(block_basis))
        shift = 3.0 * (1.0 + float(np.abs(g).sum()))
        x = sum(gi * b for gi, b in zip(g, block_basis)) + shift * proj
        w, v = hermitian_eig(x, tol)
        inside = w > shift / 2.0
        if int(inside.sum()) != rank:
            continue
        clusters = eigenvalue_clusters(w[:rank], tol.cluster_gap)
        if len(clusters) != dim_k or any(idx.size != dim_r for idx in clusters):
            continue
        minimal = [v[:, idx] for idx in clusters]  # orthonormal columns per p_i

        g2 = rng.standard_normal(len(block_basis))
        y = sum(gi * b for gi, b in zip(g2, block_basis))
        p0 = minimal[0] @ minimal[0].conj().T
        cols = []
        degenerate = False
        for i, cols_i in enumerate(minimal):
            if i == 0:
                u_dag = p0
            else:
                p_i = cols_i @ cols_i.conj().T
                wmat = p0 @ y @ p_i
                uu, ss, vv = np.linalg.svd(wmat)
                if ss[dim_r - 1] <= tol.cluster_gap:
                    degenerate = True
                    break
                u_dag = dagger(uu[:, :dim_r] @ vv[:dim_r, :])
            for j in range(dim_r):
                cols.append(u_dag @ minimal[0][:, j])
        if degenerate:
            continue
        fact = np.stack(cols, axis=1)
        if np.abs(dagger(fact) @ fact - np.eye(rank)).max() > PRODUCT_RESIDUAL:
            continue
        ok = True
        for b in block_basis:
            c = dagger(fact) @ b @ fact
            c_k = partial_trace(c, (dim_k, dim_r), "second") / dim_r
            if hs_norm(c - kron(c_k, np.eye(dim_r))) > PRODUCT_RESIDUAL:
                ok = False
                break
        if ok:
            return fact
    raise DegenerateCenter("matrix-unit construction failed after resampling")


def decompose(space: OperatorSubspace, instrument: Instrument,
              tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> FactorDecomposition:
    """Split a fixed-point algebra into factors and extract the block states."""
    if not verify_algebra(space, tol):
        raise NotAnAlgebra("span fails identity/adjoint/product closure")
    d = space.dim
    rng = np.random.default_rng(seed)
    center = _center_basis(space, tol)
    projections = _minimal_central_projections(center, space, tol, rng)

    avg = cesaro_average(instrument.total_channel().superoperator)
    rho_av = hermitianize(unvec(avg @ vec(np.eye(d) / d), d))

    blocks = []
    for proj in projections:
        block_mats = [proj @ b @ proj for b in space.basis]
        block_basis = hermitian_basis(block_mats, d, tol)
        bdim = len(block_basis)
        dim_k = isqrt(bdim)
        if dim_k * dim_k != bdim:
            raise NotAnAlgebra(f"block algebra dimension {bdim} is not a perfect square")
        rank = int(round(float(np.trace(proj).real)))
        if rank % dim_k != 0:
            raise NotAnAlgebra(f"projection rank {rank} not divisible by dim K = {dim_k}")
        dim_r = rank // dim_k

        fact = _block_factorizer(proj, block_basis, dim_k, dim_r, tol, rng)
        omega_raw = partial_trace(dagger(fact) @ rho_av @ fact, (dim_k, dim_r), "first")
        omega_raw = hermitianize(omega_raw) / np.trace(omega_raw).real
        w_om, u_om = hermitian_eig(omega_raw, tol)
        fact = fact @ kron(np.eye(dim_k), u_om)
        omega = partial_trace(dagger(fact) @ rho_av @ fact, (dim_k, dim_r), "first")
        omega = hermitianize(omega) / np.trace(omega).real
        blocks.append(FactorBlock(proj, dim_k, dim_r, fact, State(omega, tol)))

    deco = FactorDecomposition(space, tuple(blocks), 0.0)
    residual = subspace_distance(deco.block_units(), list(space.basis), d)
    return FactorDecomposition(space, tuple(blocks), float(residual))


# ---------------------------------------------------------------------------
# effect blocks


@dataclass(frozen=True)
class EffectBlockDecomposition:
    """Per-outcome, per-block components E_{x,alpha} with E_x = sum_a W(1 (x) E_{x,a})W^dag."""

    outcomes: tuple[str, ...]
    blocks: tuple[tuple[np.ndarray, ...], ...]  # indexed [outcome][block]
    residuals: tuple[float, ...]

    def spectra(self) -> list[list[np.ndarray]]:
        return [[hermitian_eig(b)[0] for b in per_outcome] for per_outcome in self.blocks]

    def strictly_interior(self, tol: Tolerances = DEFAULT_TOL) -> bool:
        cut = tol.rank_threshold
        return all(
            w.size > 0 and w[-1] > cut and w[0] < 1.0 - cut
            for per_outcome in self.spectra()
            for w in per_outcome
        )


def effect_blocks(observable: Observable, decomposition: FactorDecomposition,
                  tol: Tolerances = DEFAULT_TOL) -> EffectBlockDecomposition:
    """Components of each effect along the factor decomposition.

    Each effect must commute with the fixed-point algebra, in which case it
    is 1_K (x) E_{x,alpha} on every block; the component is recovered by a
    partial trace over K and certified by reconstructing the effect.
    """
    d = decomposition.space.dim
    for e in observable.effects:
        for b in decomposition.space.basis:
            if np.abs(e @ b - b @ e).max() > RECONSTRUCTION_LIMIT:
                raise DecompositionMismatch("effect does not commute with the fixed-point span")
    per_outcome = []
    residuals = []
    for e in observable.effects:
        comps = []
        rebuilt = np.zeros((d, d), dtype=np.complex128)
        for blk in decomposition.blocks:
            c = dagger(blk.factorizer) @ e @ blk.factorizer
            comp = hermitianize(partial_trace(c, (blk.dim_k, blk.dim_r), "first") / blk.dim_k)
            comps.append(comp)
            rebuilt += blk.factorizer @ kron(np.eye(blk.dim_k), comp) @ dagger(blk.factorizer)
        res = float(np.abs(e - rebuilt).max())
        if res > RECONSTRUCTION_LIMIT:
            raise DecompositionMismatch(f"effect reconstruction residual {res:.3e}")
        per_outcome.append(tuple(comps))
        residuals.append(res)
    return EffectBlockDecomposition(observable.outcomes, tuple(per_outcome), tuple(residuals))


def commutant_residual(space: OperatorSubspace, observable: Observable) -> float:
    """Largest commutator norm between a basis element and an effect (F within E')."""
    return max(
        float(hs_norm(e @ b - b @ e))
        for e in observable.effects
        for b in space.basis
    )
