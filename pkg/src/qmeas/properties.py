"""Operational property checks for instruments, in the Heisenberg picture.

Every check runs the dual maps on an operator basis rather than sampling
states: non-disturbance and first-kindness compare I_X^*(A) with A on the
relevant effects, repeatability compares I_x^*(E_y) with delta_xy E_x, and
ideality tests invariance on a basis of operators supported where the
effect attains 1.  Extremality is decided by linear independence of the
products of a minimal Kraus family, which is necessary and sufficient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .classify import ObservableClassification
from .core import (
    Instrument,
    MeasurementScheme,
    Observable,
    apply,
    apply_dual,
    kraus_from_choi,
    scheme_to_instrument,
    superop_distance,
)
from .errors import SchemeMismatch
from .linalg import DEFAULT_TOL, Tolerances, dagger, hermitian_eig, kron, numerical_rank, vec

IDEAL_BASIS_RESIDUAL = 1e-8
SCHEME_IDENTITY_RESIDUAL = 1e-7
SCHEME_IMPLEMENTS_RESIDUAL = 1e-8

POSSIBLE = "possible"
IMPOSSIBLE = "impossible"
NOT_COVERED = "not_covered"

IDEAL_TRUE = "true"
IDEAL_FALSE = "false"
IDEAL_NOT_APPLICABLE = "not_applicable"


def check_non_disturbance(instrument: Instrument, other: Observable,
                          tol: Tolerances = DEFAULT_TOL) -> bool:
    """I_X^*(F_y) = F_y for every effect of the other observable."""
    total = instrument.total_channel()
    return all(
        np.abs(apply_dual(total, f) - f).max() <= tol.atol_equality
        for f in other.effects
    )


def check_first_kind(instrument: Instrument, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Non-disturbance of the instrument's own observable."""
    return check_non_disturbance(instrument, instrument.induced_observable(), tol)


def check_repeatable(instrument: Instrument, tol: Tolerances = DEFAULT_TOL) -> bool:
    """I_x^*(E_y) = delta_xy E_x for all outcome pairs."""
    effects = instrument.induced_observable().effects
    for x, op in enumerate(instrument.operations):
        for y, e in enumerate(effects):
            expected = effects[x] if x == y else np.zeros_like(e)
            if np.abs(apply_dual(op, e) - expected).max() > tol.atol_equality:
                return False
    return True


def check_ideal(instrument: Instrument, tol: Tolerances = DEFAULT_TOL) -> str:
    """'true'/'false' when every effect attains norm one, else 'not_applicable'.

    Ideality asks that states certain of an outcome pass undisturbed; such
    states exist only for norm-1 effects, and they span the operators living
    on the eigenvalue-1 eigenspace Q_x, so invariance is tested on a basis
    of Q_x-supported operators.
    """
    obs = instrument.induced_observable()
    spectra = [hermitian_eig(e, tol)[0] for e in obs.effects]
    if any(w[0] < 1.0 - tol.rank_threshold for w in spectra):
        return IDEAL_NOT_APPLICABLE
    for op, e in zip(instrument.operations, obs.effects):
        w, v = hermitian_eig(e, tol)
        q = v[:, w >= 1.0 - tol.rank_threshold]
        for i in range(q.shape[1]):
            for j in range(q.shape[1]):
                a = np.outer(q[:, i], q[:, j].conj())
                if np.abs(apply(op, a) - a).max() > IDEAL_BASIS_RESIDUAL:
                    return IDEAL_FALSE
    return IDEAL_TRUE


@dataclass(frozen=True)
class ExtremalResult:
    extremal: bool
    kraus_ranks: tuple[int, ...]
    gram_rank: int

    @property
    def product_count(self) -> int:
        return sum(m * m for m in self.kraus_ranks)


def minimal_kraus(operation, tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    """Kraus family of minimal size, from the Choi eigendecomposition."""
    return kraus_from_choi(operation.choi, operation.dim_out, operation.dim_in, tol)


def check_extremal(instrument: Instrument, tol: Tolerances = DEFAULT_TOL) -> ExtremalResult:
    """Linear independence of all products K_i^dag K_j of minimal Kraus families.

    The criterion is basis-independent: any other minimal family spans the
    same product set.
    """
    families = [minimal_kraus(op, tol) for op in instrument.operations]
    products = [
        vec(dagger(a) @ b)
        for family in families
        for a in family
        for b in family
    ]
    gram_rank = numerical_rank(np.stack(products, axis=0), tol)
    ranks = tuple(len(f) for f in families)
    return ExtremalResult(gram_rank == sum(m * m for m in ranks), ranks, gram_rank)


# ---------------------------------------------------------------------------
# class-level feasibility verdicts


@dataclass(frozen=True)
class ExtremalWitness:
    """A verified model certifying that some class admits extremal constrained schemes."""

    name: str
    description: str
    applies: Callable[[ObservableClassification, int], bool]


def _norm1_big_rank(c: ObservableClassification, dim: int) -> bool:
    return c.is_norm1 and min(c.per_effect_ranks) ** 2 >= dim


def _completely_unsharp(c: ObservableClassification, dim: int) -> bool:
    return c.is_completely_unsharp


EXTREMAL_WITNESSES: tuple[ExtremalWitness, ...] = (
    ExtremalWitness(
        "two-qubit-sharp-scheme",
        "non-unitary qubit-ancilla scheme measuring a rank-2 sharp pair extremally",
        _norm1_big_rank,
    ),
    ExtremalWitness(
        "unsharp-luders-pair",
        "Luders instrument of a completely unsharp binary pair with independent effects",
        _completely_unsharp,
    ),
)

THEOREM_ROWS = ("non_disturbance", "first_kind", "repeatable", "ideal", "extremal")


@dataclass(frozen=True)
class TheoremPredicates:
    """Row verdicts: can a constrained scheme realize the property for this class?"""

    verdicts: dict
    reasons: dict

    def as_tuple(self) -> tuple[str, ...]:
        return tuple(self.verdicts[row] for row in THEOREM_ROWS)


def theorem_predicates(c: ObservableClassification, dim: int) -> TheoremPredicates:
    verdicts: dict[str, str] = {}
    reasons: dict[str, str] = {}

    if c.is_completely_unsharp:
        verdicts["non_disturbance"] = POSSIBLE
        reasons["non_disturbance"] = "completely unsharp: a commuting observable survives undisturbed"
    elif c.is_norm1:
        verdicts["non_disturbance"] = IMPOSSIBLE
        reasons["non_disturbance"] = "norm-1 effects force disturbance of every commuting observable"
    elif c.is_small_rank:
        verdicts["non_disturbance"] = IMPOSSIBLE
        reasons["non_disturbance"] = "a rank-1 effect collapses the fixed-point algebra to scalars"
    else:
        verdicts["non_disturbance"] = NOT_COVERED
        reasons["non_disturbance"] = "between the decided classes"

    if c.is_commutative and c.is_completely_unsharp:
        verdicts["first_kind"] = POSSIBLE
        reasons["first_kind"] = "commutative and completely unsharp: own-observable invariance attainable"
    else:
        verdicts["first_kind"] = IMPOSSIBLE
        reasons["first_kind"] = "first-kindness needs a commutative completely unsharp observable"

    verdicts["repeatable"] = IMPOSSIBLE
    reasons["repeatable"] = "repeatability is excluded outright under rank non-decrease"
    verdicts["ideal"] = IMPOSSIBLE
    reasons["ideal"] = "ideality is excluded outright under rank non-decrease"

    if min(c.per_effect_ranks) ** 2 < dim:
        verdicts["extremal"] = IMPOSSIBLE
        reasons["extremal"] = "an effect has rank below sqrt(dim)"
    else:
        for witness in EXTREMAL_WITNESSES:
            if witness.applies(c, dim):
                verdicts["extremal"] = POSSIBLE
                reasons["extremal"] = f"witness: {witness.name}"
                break
        else:
            verdicts["extremal"] = NOT_COVERED
            reasons["extremal"] = "rank bound satisfied but no registered witness"

    return TheoremPredicates(verdicts, reasons)


# ---------------------------------------------------------------------------
# extremal scheme identity


def check_extremal_scheme_identity(scheme: MeasurementScheme, instrument: Instrument,
                                   tol: Tolerances = DEFAULT_TOL) -> bool:
    """E^*(A (x) Z_x) = I_x^*(A) (x) 1_A on a spanning set of system operators.

    The identity characterizes schemes implementing extremal instruments;
    for non-extremal ones it fails.  Raises SchemeMismatch when the scheme
    does not implement the instrument at all.
    """
    induced = scheme_to_instrument(scheme, tol)
    if len(induced) != len(instrument) or induced.dim != instrument.dim:
        raise SchemeMismatch("outcome sets or dimensions differ")
    dist = max(
        superop_distance(a, b)
        for a, b in zip(induced.operations, instrument.operations)
    )
    if dist > SCHEME_IMPLEMENTS_RESIDUAL * instrument.dim:
        raise SchemeMismatch(f"scheme's instrument is {dist:.3e} away from the claimed one")

    ds, da = scheme.system_dim, scheme.ancilla_dim
    eye_a = np.eye(da)
    for z, op in zip(scheme.pointer.effects, instrument.operations):
        for a_row in range(ds):
            for a_col in range(ds):
                unit = np.zeros((ds, ds), dtype=np.complex128)
                unit[a_row, a_col] = 1.0
                lhs = apply_dual(scheme.interaction, kron(unit, z))
                rhs = kron(apply_dual(op, unit), eye_a)
                if np.abs(lhs - rhs).max() > SCHEME_IDENTITY_RESIDUAL:
                    return False
    return True


# ---------------------------------------------------------------------------
# one-call report


@dataclass(frozen=True)
class PropertyReport:
    first_kind: bool
    repeatable: bool
    ideal: str
    extremal: ExtremalResult
    rank_bound_ok: bool
    non_disturbance: bool | None = None
    residuals: dict = field(default_factory=dict)


def evaluate_properties(instrument: Instrument, tol: Tolerances = DEFAULT_TOL,
                        against: Observable | None = None) -> PropertyReport:
    obs = instrument.induced_observable()
    dim = instrument.dim
    ranks = [numerical_rank(e, tol) for e in obs.effects]
    total = instrument.total_channel()
    residuals = {
        "first_kind": max(float(np.abs(apply_dual(total, e) - e).max()) for e in obs.effects),
    }
    report = PropertyReport(
        first_kind=check_first_kind(instrument, tol),
        repeatable=check_repeatable(instrument, tol),
        ideal=check_ideal(instrument, tol),
        extremal=check_extremal(instrument, tol),
        rank_bound_ok=all(r * r >= dim for r in ranks),
        non_disturbance=None if against is None else check_non_disturbance(instrument, against, tol),
        residuals=residuals,
    )
    if against is not None:
        report.residuals["non_disturbance"] = max(
            float(np.abs(apply_dual(total, f) - f).max()) for f in against.effects
        )
    return report
