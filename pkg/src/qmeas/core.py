"""States, observables, operations, instruments, and measurement schemes.

Conventions, fixed once for the whole package:

* vectorization is row-major, so vec(ABC) = (A (x) C^T) vec(B);
* the superoperator of a Kraus map rho -> sum_i K_i rho K_i^dag is
  sum_i K_i (x) conj(K_i), acting on row-major vec;
* the Choi matrix is sum_i vec(K_i) vec(K_i)^dag, whose rank equals the
  minimal number of Kraus operators.

Kraus lists are the stored representation; superoperators and Choi
matrices are derived on demand and cached on the instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, NotCP, ValidationError
from .linalg import (
    DEFAULT_TOL,
    Tolerances,
    as_complex_matrix,
    dagger,
    hermitian_eig,
    hs_norm,
    kron,
    matrix_sqrt_psd,
    partial_trace,
    unvec,
    vec,
)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class State:
    """Density matrix: Hermitian, PSD, unit trace."""

    matrix: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        m = as_complex_matrix(self.matrix)
        if m.shape[0] != m.shape[1]:
            raise ValidationError(f"state matrix must be square, got {m.shape}")
        w, _ = hermitian_eig(m, self.tol)
        if w[-1] < -self.tol.atol_equality:
            raise ValidationError(f"state has negative eigenvalue {w[-1]:.3e}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > self.tol.atol_equality * m.shape[0]:
            raise ValidationError(f"state trace {tr!r} is not 1")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @staticmethod
    def complete_mixture(dim: int) -> "State":
        return State(np.eye(dim) / dim)

    @staticmethod
    def pure(vector) -> "State":
        v = np.asarray(vector, dtype=np.complex128).reshape(-1)
        v = v / np.linalg.norm(v)
        return State(np.outer(v, v.conj()))

    @staticmethod
    def diagonal(weights) -> "State":
        return State(np.diag(np.asarray(weights, dtype=np.complex128)))


@dataclass(frozen=True)
class Observable:
    """Discrete POVM: labelled effects, each 0 <= E_x <= 1, summing to identity."""

    effects: tuple[np.ndarray, ...]
    outcomes: tuple[str, ...] = ()
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        effects = tuple(_freeze(as_complex_matrix(e)) for e in self.effects)
        if not effects:
            raise ValidationError("observable needs at least one effect")
        outcomes = self.outcomes or tuple(str(i) for i in range(len(effects)))
        if len(outcomes) != len(effects):
            raise ValidationError("outcome labels do not match effect count")
        if len(set(outcomes)) != len(outcomes):
            raise ValidationError("outcome labels must be unique")
        d = effects[0].shape[0]
        atol = self.tol.atol_equality
        for label, e in zip(outcomes, effects):
            if e.shape != (d, d):
                raise DimensionMismatch(f"effect {label!r} has shape {e.shape}, expected {(d, d)}")
            w, _ = hermitian_eig(e, self.tol)
            if w[-1] < -atol or w[0] > 1.0 + atol:
                raise ValidationError(f"effect {label!r} spectrum [{w[-1]:.3e}, {w[0]:.3e}] leaves [0,1]")
            if np.abs(e).max() <= atol:
                raise ValidationError(f"effect {label!r} is the zero matrix")
        total = sum(effects)
        if np.abs(total - np.eye(d)).max() > atol * len(effects):
            raise ValidationError("effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "outcomes", tuple(outcomes))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    def __len__(self) -> int:
        return len(self.effects)


class _KrausMap:
    """Shared behaviour of Operation and Channel (Kraus-represented CP maps)."""

    kraus: tuple[np.ndarray, ...]

    def _init_kraus(self, kraus) -> None:
        ks = tuple(_freeze(as_complex_matrix(k)) for k in kraus)
        if not ks:
            raise ValidationError("at least one Kraus operator required")
        shape = ks[0].shape
        for k in ks:
            if k.shape != shape:
                raise DimensionMismatch("Kraus operators differ in shape")
        object.__setattr__(self, "kraus", ks)

    @property
    def dim_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus[0].shape[0]

    def _kraus_sum(self) -> np.ndarray:
        return sum(dagger(k) @ k for k in self.kraus)

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix acting on row-major vec(rho)."""
        s = sum(np.kron(k, k.conj()) for k in self.kraus)
        return _freeze(s)

    @cached_property
    def dual_superoperator(self) -> np.ndarray:
        """Matrix of the Heisenberg-picture map A -> sum K^dag A K."""
        s = sum(np.kron(dagger(k), k.T) for k in self.kraus)
        return _freeze(s)

    @cached_property
    def choi(self) -> np.ndarray:
        return _freeze(sum(np.outer(vec(k), vec(k).conj()) for k in self.kraus))


@dataclass(frozen=True)
class Operation(_KrausMap):
    """Trace-non-increasing CP map in Kraus form."""

    kraus: tuple[np.ndarray, ...]
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._init_kraus(self.kraus)
        w, _ = hermitian_eig(self._kraus_sum(), self.tol)
        if w[0] > 1.0 + self.tol.atol_equality * len(self.kraus):
            raise ValidationError(f"sum K^dag K has eigenvalue {w[0]:.12f} > 1")


@dataclass(frozen=True)
class Channel(_KrausMap):
    """Trace-preserving CP map in Kraus form."""

    kraus: tuple[np.ndarray, ...]
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._init_kraus(self.kraus)
        dev = np.abs(self._kraus_sum() - np.eye(self.dim_in)).max()
        if dev > self.tol.atol_equality * max(1, len(self.kraus)):
            raise ValidationError(f"sum K^dag K deviates from identity by {dev:.3e}")

    @staticmethod
    def unitary(u) -> "Channel":
        return Channel((as_complex_matrix(u),))

    @staticmethod
    def identity(dim: int) -> "Channel":
        return Channel((np.eye(dim, dtype=np.complex128),))

    def as_operation(self) -> Operation:
        return Operation(self.kraus, self.tol)


@dataclass(frozen=True)
class Instrument:
    """Outcome-indexed operations on one space whose total is a channel."""

    operations: tuple[Operation, ...]
    outcomes: tuple[str, ...] = ()
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        ops = tuple(self.operations)
        if not ops:
            raise ValidationError("instrument needs at least one operation")
        outcomes = self.outcomes or tuple(str(i) for i in range(len(ops)))
        if len(outcomes) != len(ops):
            raise ValidationError("outcome labels do not match operation count")
        d = ops[0].dim_in
        for op in ops:
            if op.dim_in != d or op.dim_out != d:
                raise DimensionMismatch("instrument operations must share one endomorphic dimension")
        total = sum(op._kraus_sum() for op in ops)
        dev = np.abs(total - np.eye(d)).max()
        if dev > self.tol.atol_equality * sum(len(op.kraus) for op in ops):
            raise ValidationError(f"operations do not sum to a channel (deviation {dev:.3e})")
        object.__setattr__(self, "operations", ops)
        object.__setattr__(self, "outcomes", tuple(outcomes))
        # induced observable must be valid; constructing it runs the checks
        self.induced_observable()

    @property
    def dim(self) -> int:
        return self.operations[0].dim_in

    def __len__(self) -> int:
        return len(self.operations)

    def induced_observable(self) -> Observable:
        """E_x = I_x^*(1), the observable the instrument measures."""
        return Observable(tuple(op._kraus_sum() for op in self.operations), self.outcomes, self.tol)

    def total_channel(self) -> Channel:
        ks = [k for op in self.operations for k in op.kraus]
        return Channel(tuple(ks), self.tol)


@dataclass(frozen=True)
class MeasurementScheme:
    """Ancilla state, interaction channel on system (x) ancilla, pointer observable."""

    system_dim: int
    ancilla: State
    interaction: Channel
    pointer: Observable
    tol: Tolerances = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self) -> None:
        d = self.system_dim * self.ancilla.dim
        if self.interaction.dim_in != d or self.interaction.dim_out != d:
            raise DimensionMismatch(
                f"interaction acts on dimension {self.interaction.dim_in}, expected {d}"
            )
        if self.pointer.dim != self.ancilla.dim:
            raise DimensionMismatch("pointer observable must live on the ancilla")

    @property
    def ancilla_dim(self) -> int:
        return self.ancilla.dim

    @property
    def outcomes(self) -> tuple[str, ...]:
        return self.pointer.outcomes


# ---------------------------------------------------------------------------
# applying maps


def _as_matrix(x) -> np.ndarray:
    return x.matrix if isinstance(x, State) else as_complex_matrix(x)


def apply(op: _KrausMap, rho) -> np.ndarray:
    """Schroedinger action sum_i K_i rho K_i^dag."""
    m = _as_matrix(rho)
    if m.shape != (op.dim_in, op.dim_in):
        raise DimensionMismatch(f"input shape {m.shape} does not match dim_in {op.dim_in}")
    return sum(k @ m @ dagger(k) for k in op.kraus)


def apply_dual(op: _KrausMap, a) -> np.ndarray:
    """Heisenberg action sum_i K_i^dag A K_i."""
    m = _as_matrix(a)
    if m.shape != (op.dim_out, op.dim_out):
        raise DimensionMismatch(f"input shape {m.shape} does not match dim_out {op.dim_out}")
    return sum(dagger(k) @ m @ k for k in op.kraus)


def compose(after: _KrausMap, before: _KrausMap):
    """Composition after . before, with all pairwise Kraus products."""
    if before.dim_out != after.dim_in:
        raise DimensionMismatch("composition dimensions do not match")
    ks = tuple(a @ b for a in after.kraus for b in before.kraus)
    cls = Channel if isinstance(after, Channel) and isinstance(before, Channel) else Operation
    return cls(ks)


def tensor_op(a: _KrausMap, b: _KrausMap):
    """Tensor product map with Kraus set {A_i (x) B_j}."""
    ks = tuple(np.kron(x, y) for x in a.kraus for y in b.kraus)
    cls = Channel if isinstance(a, Channel) and isinstance(b, Channel) else Operation
    return cls(ks)


# ---------------------------------------------------------------------------
# representation changes


def choi_of(op: _KrausMap) -> np.ndarray:
    return op.choi


def superop_from_kraus(kraus) -> np.ndarray:
    return sum(np.kron(np.asarray(k), np.asarray(k).conj()) for k in kraus)


def choi_from_superop(s: np.ndarray, dim_out: int, dim_in: int) -> np.ndarray:
    """Reshuffle a superoperator matrix into the Choi matrix."""
    s = as_complex_matrix(s)
    if s.shape != (dim_out * dim_out, dim_in * dim_in):
        raise DimensionMismatch(f"superoperator shape {s.shape} does not match dims")
    t = s.reshape(dim_out, dim_out, dim_in, dim_in)
    return t.transpose(0, 2, 1, 3).reshape(dim_out * dim_in, dim_out * dim_in)


def kraus_from_choi(choi: np.ndarray, dim_out: int, dim_in: int,
                    tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, ...]:
    """Minimal Kraus set from a Choi matrix.

    Eigenvalues below kernel_threshold times the largest are discarded;
    an eigenvalue below -10*atol means the map is not CP.
    """
    c = as_complex_matrix(choi)
    if c.shape != (dim_out * dim_in, dim_out * dim_in):
        raise DimensionMismatch("Choi matrix shape does not match dims")
    w, v = hermitian_eig(c, tol)
    if w[-1] < -10 * tol.atol_equality:
        raise NotCP(f"Choi eigenvalue {w[-1]:.3e}")
    cut = tol.kernel_threshold * max(1.0, float(w[0]))
    ks = tuple(unvec(np.sqrt(w[i]) * v[:, i], dim_out, dim_in) for i in range(w.size) if w[i] > cut)
    if not ks:
        raise NotCP("Choi matrix is numerically zero")
    return ks


def operation_from_superop(s: np.ndarray, dim_out: int, dim_in: int,
                           tol: Tolerances = DEFAULT_TOL) -> Operation:
    return Operation(kraus_from_choi(choi_from_superop(s, dim_out, dim_in), dim_out, dim_in, tol), tol)


def superop_distance(a: _KrausMap, b: _KrausMap) -> float:
    """Frobenius distance between superoperator matrices (representation-free)."""
    return hs_norm(a.superoperator - b.superoperator)


# ---------------------------------------------------------------------------
# instruments from observables and schemes


def luders_instrument(observable: Observable, tol: Tolerances = DEFAULT_TOL) -> Instrument:
    """Instrument with single Kraus sqrt(E_x) per outcome."""
    ops = tuple(Operation((matrix_sqrt_psd(e, tol),), tol) for e in observable.effects)
    return Instrument(ops, observable.outcomes, tol)


def restriction_map(b: np.ndarray, xi: State, system_dim: int) -> np.ndarray:
    """Gamma_xi(B) on the system, defined by tr[Gamma_xi(B) rho] = tr[B (rho (x) xi)].

    Evaluates to tr_A[B (1 (x) xi)]; implemented directly from that identity.
    """
    b = as_complex_matrix(b)
    d = system_dim * xi.dim
    if b.shape != (d, d):
        raise DimensionMismatch(f"operator shape {b.shape} does not match compound dim {d}")
    return partial_trace(b @ kron(np.eye(system_dim), xi.matrix), (system_dim, xi.dim), "second")


def scheme_to_instrument(scheme: MeasurementScheme, tol: Tolerances = DEFAULT_TOL) -> Instrument:
    """Instrument I_x(rho) = tr_A[(1 (x) Z_x) E(rho (x) xi)] with minimal Kraus forms."""
    ds, da = scheme.system_dim, scheme.ancilla_dim
    xi = scheme.ancilla.matrix
    images: list[list[np.ndarray]] = [[] for _ in scheme.pointer.effects]
    for b in range(ds):
        for dcol in range(ds):
            unit = np.zeros((ds, ds), dtype=np.complex128)
            unit[b, dcol] = 1.0
            out = apply(scheme.interaction, kron(unit, xi))
            for z_idx, z in enumerate(scheme.pointer.effects):
                sel = partial_trace(kron(np.eye(ds), z) @ out, (ds, da), "second")
                images[z_idx].append(sel)
    ops = []
    for per_outcome in images:
        s = np.stack([vec(m) for m in per_outcome], axis=1)
        ops.append(operation_from_superop(s, ds, ds, tol))
    return Instrument(tuple(ops), scheme.pointer.outcomes, tol)


def scheme_dual_superoperator(scheme: MeasurementScheme, outcome_index: int) -> np.ndarray:
    """Superoperator of I_x^* built as Gamma_xi . E^* (. (x) Z_x).

    Cross-check route for scheme_to_instrument; the factorization through
    the restriction map is the defining identity of the induced instrument.
    """
    ds = scheme.system_dim
    z = scheme.pointer.effects[outcome_index]
    cols = []
    for a in range(ds):
        for b in range(ds):
            unit = np.zeros((ds, ds), dtype=np.complex128)
            unit[a, b] = 1.0
            lifted = apply_dual(scheme.interaction, kron(unit, z))
            cols.append(vec(restriction_map(lifted, scheme.ancilla, ds)))
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# state comparison


def fidelity(rho, sigma, tol: Tolerances = DEFAULT_TOL) -> float:
    """Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2."""
    r, s = _as_matrix(rho), _as_matrix(sigma)
    root = matrix_sqrt_psd(r, tol)
    inner = matrix_sqrt_psd(root @ s @ root, tol)
    return float(np.trace(inner).real ** 2)
