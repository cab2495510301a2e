"""Rank non-decrease verdicts for channels and measurement schemes.

A channel is *constrained* when every full-rank input state maps to a
full-rank output.  Testing one well-chosen input suffices: the image of
the complete mixture is full-rank iff any full-rank input has a
full-rank image, iff the dual map is faithful.  For endomorphic channels
the same property is equivalent to the existence of a full-rank fixed
state, obtained here by Cesaro-averaging the channel powers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Channel, MeasurementScheme, State, apply, apply_dual, fidelity
from .errors import InfeasibleDimensions, NoConvergence, NotEndomorphic, NotFullRank
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    dagger,
    hermitian_eig,
    hs_norm,
    numerical_rank,
    unvec,
    vec,
)

CESARO_RESIDUAL = 1e-10
CESARO_MAX_DOUBLINGS = 50  # budget cap; the growth guard usually stops near 30


@dataclass(frozen=True)
class ThirdLawVerdict:
    """constrained: rank non-decrease holds.

    witness: image of the complete mixture when constrained (full-rank by
    construction); the complete mixture itself otherwise (a full-rank input
    whose image is rank-deficient).  min_output_eigenvalue is the smallest
    eigenvalue of the mixture's image either way.
    """

    constrained: bool
    witness: State | None
    min_output_eigenvalue: float


def check_channel_thirdlaw(channel: Channel, tol: Tolerances = DEFAULT_TOL) -> ThirdLawVerdict:
    """Rank test on the image of the complete mixture."""
    mix = State.complete_mixture(channel.dim_in)
    out = apply(channel, mix)
    rank = numerical_rank(out, tol)
    w, _ = hermitian_eig(out, tol)
    constrained = rank == channel.dim_out
    witness = State(out) if constrained else mix
    return ThirdLawVerdict(constrained, witness, float(w[-1]))


def check_faithfulness(channel: Channel, tol: Tolerances = DEFAULT_TOL) -> bool:
    """True iff the dual map kills no nonzero positive operator.

    Independent route from check_channel_thirdlaw: a CP map's dual kills
    some A^dag A != 0 iff it kills a rank-one projector, iff the frame
    operator sum_i K_i K_i^dag is singular.  When a kernel vector exists
    its projector is confirmed to be annihilated before answering False.
    """
    frame = sum(k @ dagger(k) for k in channel.kraus)
    w, v = hermitian_eig(frame, tol)
    cut = tol.rank_threshold * max(1.0, float(w[0]))
    if w[-1] > cut:
        return True
    phi = v[:, -1]
    killed = apply_dual(channel, np.outer(phi, phi.conj()))
    if hs_norm(killed) > np.sqrt(cut):
        raise NoConvergence("frame operator nearly singular but witness projector survives")
    return False


def cesaro_average(superop: np.ndarray,
                   residual_target: float = CESARO_RESIDUAL,
                   max_doublings: int = CESARO_MAX_DOUBLINGS) -> np.ndarray:
    """Cesaro average (1/N) sum_{n=1..N} S^n by the doubling recurrence.

    A_{2N} = (A_N + S^N A_N)/2 keeps the cost logarithmic in N.  Repeated
    squaring of S amplifies eigenvalue rounding as (1 + eps)**N, so past
    ~30 doublings the difference between successive averages grows again;
    the loop stops at convergence or at the first sustained growth and
    keeps the best average seen.  Returning its square pushes the range
    into the fixed subspace, leaving S-invariance at machine precision.
    """
    avg = np.array(superop, dtype=np.complex128)
    power = avg.copy()
    best = avg
    best_diff = np.inf
    prev_diff = np.inf
    growth = 0
    for _ in range(max_doublings):
        nxt = 0.5 * (avg + power @ avg)
        power = power @ power
        diff = hs_norm(nxt - avg)
        if diff < residual_target:
            return nxt @ nxt
        if diff < best_diff:
            best, best_diff = nxt, diff
        growth = growth + 1 if diff > prev_diff else 0
        if growth >= 3:
            break
        prev_diff = diff
        avg = nxt
    return best @ best


@dataclass(frozen=True)
class FixedStateResult:
    state: State
    residual: float
    is_full_rank: bool


def full_rank_fixed_state(channel: Channel, tol: Tolerances = DEFAULT_TOL) -> FixedStateResult:
    """Cesaro-average the channel powers applied to the complete mixture.

    The limit is always a fixed state; it is full-rank exactly when the
    channel is constrained.  Raises NoConvergence when the averaged state
    still moves by more than 1e-8 under the channel at budget exhaustion.
    """
    if channel.dim_in != channel.dim_out:
        raise NotEndomorphic("fixed states need dim_in == dim_out")
    d = channel.dim_in
    avg = cesaro_average(channel.superoperator)
    rho = unvec(avg @ vec(np.eye(d) / d), d)
    rho = 0.5 * (rho + dagger(rho))
    state = State(rho / np.trace(rho).real, tol)
    residual = hs_norm(apply(channel, state) - state.matrix)
    if residual > 1e-8:
        raise NoConvergence(f"Cesaro average residual {residual:.3e} after budget")
    return FixedStateResult(state, float(residual), numerical_rank(state.matrix, tol) == d)


def lemma1_lambda(rho: State, sigma: State, tol: Tolerances = DEFAULT_TOL) -> float:
    """Largest lambda with rho >= lambda*sigma for every state sigma <= 1.

    Equals the smallest eigenvalue of rho; requires rho full-rank.
    """
    if rho.dim != sigma.dim:
        raise NotFullRank("states must share a dimension")
    if numerical_rank(rho.matrix, tol) < rho.dim:
        raise NotFullRank("rho must be full-rank")
    w, _ = hermitian_eig(rho.matrix, tol)
    return float(w[-1])


def check_scheme_thirdlaw(scheme: MeasurementScheme, tol: Tolerances = DEFAULT_TOL) -> ThirdLawVerdict:
    """Full-rank ancilla state and constrained interaction channel."""
    xi = scheme.ancilla
    w, _ = hermitian_eig(xi.matrix, tol)
    if numerical_rank(xi.matrix, tol) < xi.dim:
        return ThirdLawVerdict(False, None, float(w[-1]))
    return check_channel_thirdlaw(scheme.interaction, tol)


# ---------------------------------------------------------------------------
# preparing a pure state with rank-deficient resources only


def minimal_copy_count(rank_xi: int, system_dim: int, ancilla_dim: int, cap: int = 12) -> int:
    """Smallest D with rank(xi)^D * N <= M^D, searched directly."""
    if rank_xi < 1:
        raise InfeasibleDimensions("resource state must have positive rank")
    for d_count in range(1, cap + 1):
        if (rank_xi ** d_count) * system_dim <= ancilla_dim ** d_count:
            return d_count
    raise InfeasibleDimensions(
        f"no D <= {cap} satisfies rank^D * {system_dim} <= {ancilla_dim}^D for rank {rank_xi}"
    )


@dataclass(frozen=True)
class PurificationResult:
    copies: int
    restricted: State   # system state after the permutation, before relabelling
    state: State        # final output of the preparation channel
    fidelity: float


def purify_via_unconstrained(rho0: State, xi: State, target: State,
                             tol: Tolerances = DEFAULT_TOL) -> PurificationResult:
    """Prepare `target` exactly from a known full-rank state and D rank-deficient copies.

    A permutation on C^N (x) (C^M)^tensor-D moves every nonzero weight of
    rho0 (x) xi^(x)D into the n=0 slice; everything is diagonal in the joint
    eigenbasis, so the permutation acts on the weight vector directly.  The
    restriction to the system is then pure, and a measure-and-prepare channel
    relabels it to the target.
    """
    n_dim, m_dim = rho0.dim, xi.dim
    if target.dim != n_dim:
        raise NotFullRank("target must live on the system space")
    if numerical_rank(rho0.matrix, tol) < n_dim:
        raise NotFullRank("rho0 must be full-rank")
    r = numerical_rank(xi.matrix, tol)
    copies = minimal_copy_count(r, n_dim, m_dim)  # raises when xi is full-rank

    lam, v_rho = hermitian_eig(rho0.matrix, tol)
    p, _ = hermitian_eig(xi.matrix, tol)
    p = np.clip(p, 0.0, None)
    p[r:] = 0.0

    weights = lam.copy()
    for _ in range(copies):
        weights = np.kron(weights, p)
    slots = weights.size
    block = m_dim ** copies

    nonzero = np.flatnonzero(weights > 0)
    zero = np.flatnonzero(weights <= 0)
    if nonzero.size > block:
        raise InfeasibleDimensions("nonzero weights exceed the n=0 slice")
    perm = np.empty(slots, dtype=np.intp)
    perm[nonzero] = np.arange(nonzero.size)
    perm[zero] = np.arange(nonzero.size, slots)
    moved = np.zeros(slots)
    moved[perm] = weights

    system_weights = moved.reshape(n_dim, block).sum(axis=1)
    restricted = State(v_rho @ np.diag(system_weights) @ v_rho.conj().T, tol)

    v0 = v_rho[:, 0]
    prep = preparation_channel(v0, target, tol)
    out = State(apply(prep, restricted), tol)
    return PurificationResult(copies, restricted, out, fidelity(out, target, tol))


def preparation_channel(pointer_vector: np.ndarray, target: State,
                        tol: Tolerances = DEFAULT_TOL) -> Channel:
    """Lambda(rho) = <v|rho|v> target + tr[(1-|v><v|) rho] * 1/N.

    Constrained: both branches contribute for full-rank inputs and the
    second is the complete mixture.
    """
    v = np.asarray(pointer_vector, dtype=np.complex128).reshape(-1)
    v = v / np.linalg.norm(v)
    n_dim = v.size
    mu, tvecs = hermitian_eig(target.matrix, tol)
    mu = np.clip(mu, 0.0, None)
    kraus = [np.sqrt(m) * np.outer(tvecs[:, i], v.conj()) for i, m in enumerate(mu) if m > 0]
    comp = np.eye(n_dim) - np.outer(v, v.conj())
    w, cvecs = hermitian_eig(comp, tol)
    for i, wi in enumerate(w):
        if wi <= 0.5:
            continue
        for k in range(n_dim):
            e = np.zeros(n_dim, dtype=np.complex128)
            e[k] = 1.0
            kraus.append(np.outer(e, cvecs[:, i].conj()) / np.sqrt(n_dim))
    return Channel(tuple(kraus), tol)
