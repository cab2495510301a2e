"""Command-line interface.

Verdict-style commands exit 0 on an affirmative answer, 1 on a negative
one, and 2 on usage or input errors; they never raise to the shell.
Reports are emitted as JSON (--json) or aligned text (--human, default),
carrying the command echo, the tolerances used, verdicts, and residuals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import modelfile
from .classify import classify
from .core import (
    Instrument,
    MeasurementScheme,
    State,
    luders_instrument,
    scheme_to_instrument,
    superop_distance,
)
from .errors import QmeasError
from .linalg import Tolerances
from .algebra import decompose, effect_blocks, fixed_point_space
from .models import (
    CATALOG,
    build_extremal_model,
    build_luders_scheme,
    build_swap_scheme,
    completely_unsharp_pair,
    extremal_instrument,
    pointer_observable,
    random_full_rank_state,
    table1_observables,
)
from .properties import (
    POSSIBLE,
    THEOREM_ROWS,
    check_extremal,
    check_first_kind,
    check_ideal,
    check_non_disturbance,
    check_repeatable,
    evaluate_properties,
    theorem_predicates,
)
from .thirdlaw import (
    check_channel_thirdlaw,
    check_scheme_thirdlaw,
    minimal_copy_count,
    purify_via_unconstrained,
)

EXIT_YES = 0
EXIT_NO = 1
EXIT_ERROR = 2

TABLE1_COLUMNS = ("small-rank", "sharp", "norm-1", "completely-unsharp")

TABLE1_EXPECTED = {
    "non_disturbance": ("x", "x", "x", "yes"),
    "first_kind": ("x", "x", "x", "yes"),
    "repeatable": ("x", "x", "x", "x"),
    "ideal": ("x", "x", "x", "x"),
    "extremal": ("x", "yes", "yes", "yes"),
}


def _tolerances(args: argparse.Namespace) -> Tolerances:
    atol = args.tol_atol
    if atol is None:
        atol = float(os.environ.get("QMEAS_TOL_ATOL", Tolerances().atol_equality))
    rank = args.tol_rank if args.tol_rank is not None else Tolerances().rank_threshold
    return Tolerances(atol_equality=atol, rank_threshold=rank)


def _emit(report: dict, args: argparse.Namespace) -> None:
    if args.json:
        print(json.dumps(report, indent=2))
        return
    _emit_human(report)


def _emit_human(report: dict, indent: int = 0) -> None:
    pad = "  " * indent
    for key, value in report.items():
        if isinstance(value, dict):
            print(f"{pad}{key}:")
            _emit_human(value, indent + 1)
        elif isinstance(value, (list, tuple)):
            print(f"{pad}{key}: {json.dumps(value)}")
        else:
            print(f"{pad}{key}: {value}")


def _echo(args: argparse.Namespace, tol: Tolerances) -> dict:
    return {
        "command": " ".join(sys.argv[1:]) if sys.argv[1:] else args.cmd,
        "tolerances": {"atol_equality": tol.atol_equality, "rank_threshold": tol.rank_threshold},
        "seed": args.seed,
    }


def _load_instrument(path: str, tol: Tolerances) -> Instrument:
    obj = modelfile.load(path)
    if isinstance(obj, MeasurementScheme):
        return scheme_to_instrument(obj, tol)
    if isinstance(obj, Instrument):
        return obj
    raise QmeasError(f"{path}: expected an instrument or scheme, got {type(obj).__name__}")


def cmd_classify(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    obj = modelfile.load(args.path)
    from .core import Observable

    if not isinstance(obj, Observable):
        raise QmeasError(f"{args.path}: expected an observable, got {type(obj).__name__}")
    c = classify(obj, tol)
    report = _echo(args, tol)
    report["classification"] = {
        "outcomes": len(obj),
        "dim": obj.dim,
        "is_sharp": c.is_sharp,
        "is_norm1": c.is_norm1,
        "is_completely_unsharp": c.is_completely_unsharp,
        "is_commutative": c.is_commutative,
        "is_small_rank": c.is_small_rank,
        "is_trivial": c.is_trivial,
        "is_non_degenerate": c.is_non_degenerate,
        "per_effect_ranks": list(c.per_effect_ranks),
        "per_effect_norms": [float(n) for n in c.per_effect_norms],
    }
    _emit(report, args)
    return EXIT_YES


def cmd_check(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    report = _echo(args, tol)
    what = args.what

    if what == "channel-thirdlaw":
        obj = modelfile.load(args.path)
        from .core import Channel

        if not isinstance(obj, Channel):
            raise QmeasError(f"{args.path}: expected a channel, got {type(obj).__name__}")
        verdict = check_channel_thirdlaw(obj, tol)
        report["constrained"] = verdict.constrained
        report["min_output_eigenvalue"] = verdict.min_output_eigenvalue
        _emit(report, args)
        return EXIT_YES if verdict.constrained else EXIT_NO

    if what == "scheme-thirdlaw":
        obj = modelfile.load(args.path)
        if not isinstance(obj, MeasurementScheme):
            raise QmeasError(f"{args.path}: expected a scheme, got {type(obj).__name__}")
        verdict = check_scheme_thirdlaw(obj, tol)
        report["constrained"] = verdict.constrained
        report["min_output_eigenvalue"] = verdict.min_output_eigenvalue
        _emit(report, args)
        return EXIT_YES if verdict.constrained else EXIT_NO

    instrument = _load_instrument(args.path, tol)

    if what == "nondisturbance":
        if not args.against:
            raise QmeasError("nondisturbance requires --against OBSERVABLE_FILE")
        from .core import Observable

        other = modelfile.load(args.against)
        if not isinstance(other, Observable):
            raise QmeasError(f"{args.against}: expected an observable")
        from .core import apply_dual

        total = instrument.total_channel()
        residual = max(float(np.abs(apply_dual(total, f) - f).max()) for f in other.effects)
        ok = check_non_disturbance(instrument, other, tol)
        report["non_disturbance"] = ok
        report["residual"] = residual
        _emit(report, args)
        return EXIT_YES if ok else EXIT_NO

    if what == "firstkind":
        ok = check_first_kind(instrument, tol)
        full = evaluate_properties(instrument, tol)
        report["first_kind"] = ok
        report["residual"] = full.residuals["first_kind"]
        _emit(report, args)
        return EXIT_YES if ok else EXIT_NO

    if what == "repeatable":
        ok = check_repeatable(instrument, tol)
        report["repeatable"] = ok
        _emit(report, args)
        return EXIT_YES if ok else EXIT_NO

    if what == "ideal":
        verdict = check_ideal(instrument, tol)
        report["ideal"] = verdict
        _emit(report, args)
        return EXIT_YES if verdict == "true" else EXIT_NO

    if what == "extremal":
        result = check_extremal(instrument, tol)
        report["extremal"] = result.extremal
        report["kraus_ranks"] = list(result.kraus_ranks)
        report["gram_rank"] = result.gram_rank
        report["product_count"] = result.product_count
        _emit(report, args)
        return EXIT_YES if result.extremal else EXIT_NO

    raise QmeasError(f"unknown check {what!r}")


# ---------------------------------------------------------------------------
# feasibility table


def _verify_witness(row: str, column: str, tol: Tolerances) -> tuple[str, bool]:
    """Build and actually run the model that makes the cell a yes."""
    if column == "completely-unsharp":
        obs = completely_unsharp_pair()
        scheme = build_luders_scheme(obs, tol)
        constrained = check_scheme_thirdlaw(scheme, tol).constrained
        inst = luders_instrument(obs, tol)
        if row == "non_disturbance":
            commuting = pointer_observable(obs.dim)
            return "luders-commuting-readout", constrained and check_non_disturbance(inst, commuting, tol)
        if row == "first_kind":
            return "luders-first-kind", constrained and check_first_kind(inst, tol)
        if row == "extremal":
            return "unsharp-luders-pair", constrained and check_extremal(inst, tol).extremal
    if row == "extremal" and column in ("sharp", "norm-1"):
        scheme = build_extremal_model()
        constrained = check_scheme_thirdlaw(scheme, tol).constrained
        inst = extremal_instrument()
        return "two-qubit-sharp-scheme", constrained and check_extremal(inst, tol).extremal
    return "none", False


def cmd_table1(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    report = _echo(args, tol)
    representatives = table1_observables()

    cells: dict[str, dict] = {row: {} for row in THEOREM_ROWS}
    all_match = True
    for col_index, column in enumerate(TABLE1_COLUMNS):
        obs = representatives[column]
        predicates = theorem_predicates(classify(obs, tol), obs.dim)
        for row in THEOREM_ROWS:
            verdict = predicates.verdicts[row]
            rendered = "yes" if verdict == POSSIBLE else "x"
            expected = TABLE1_EXPECTED[row][col_index]
            cell = {"verdict": rendered, "expected": expected}
            if verdict == POSSIBLE:
                witness, verified = _verify_witness(row, column, tol)
                cell["witness"] = witness
                cell["witness_verified"] = verified
                if not verified:
                    all_match = False
            else:
                cell["anchor"] = predicates.reasons[row]
            if rendered != expected:
                all_match = False
            cells[row][column] = cell

    report["columns"] = list(TABLE1_COLUMNS)
    report["rows"] = cells
    report["match"] = all_match
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        _render_table(report)
    return EXIT_YES if all_match else EXIT_NO


def _render_table(report: dict) -> None:
    columns = report["columns"]
    mark = {"yes": "yes", "x": " x "}
    width = max(len(c) for c in columns) + 2
    header = " " * 18 + "".join(c.rjust(width) for c in columns)
    print(header)
    for row in THEOREM_ROWS:
        cells = report["rows"][row]
        line = row.ljust(18)
        for c in columns:
            line += mark[cells[c]["verdict"]].rjust(width)
        print(line)
    print(f"match: {report['match']}")
    for row in THEOREM_ROWS:
        for c in columns:
            cell = report["rows"][row][c]
            if "witness" in cell:
                print(f"  {row}/{c}: witness {cell['witness']} verified={cell['witness_verified']}")
            else:
                print(f"  {row}/{c}: {cell['anchor']}")


# ---------------------------------------------------------------------------
# demos


def cmd_demo(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    report = _echo(args, tol)

    if args.name == "purify":
        rho0 = random_full_rank_state(2, args.seed)
        xi = State.pure(np.array([1.0, 0.0]))
        target = random_full_rank_state(2, args.seed + 1)
        result = purify_via_unconstrained(rho0, xi, target, tol)
        report["copies"] = result.copies
        report["minimal_copies_check"] = minimal_copy_count(1, 2, 2)
        report["fidelity"] = result.fidelity
        report["target_reached"] = result.fidelity > 1.0 - 1e-9
        _emit(report, args)
        return EXIT_YES if report["target_reached"] else EXIT_NO

    if args.name == "luders-scheme":
        obs = completely_unsharp_pair()
        scheme = build_luders_scheme(obs, tol)
        induced = scheme_to_instrument(scheme, tol)
        reference = luders_instrument(obs, tol)
        residual = max(
            superop_distance(a, b)
            for a, b in zip(induced.operations, reference.operations)
        )
        constrained = check_scheme_thirdlaw(scheme, tol).constrained
        report["constrained"] = constrained
        report["instrument_residual"] = residual
        report["effects"] = [[float(v) for v in np.diag(e).real] for e in obs.effects]
        _emit(report, args)
        return EXIT_YES if constrained and residual < 1e-9 else EXIT_NO

    if args.name == "decompose":
        xi = State.diagonal([0.7, 0.3])
        scheme = build_swap_scheme(xi)
        instrument = scheme_to_instrument(scheme, tol)
        space = fixed_point_space(instrument, tol)
        decomposition = decompose(space, instrument, tol, seed=args.seed)
        blocks = [(b.dim_k, b.dim_r) for b in decomposition.blocks]
        omega_dist = float(
            np.linalg.norm(decomposition.blocks[0].omega.matrix - xi.matrix)
        ) if blocks == [(2, 2)] else float("inf")
        eb = effect_blocks(instrument.induced_observable(), decomposition, tol)
        report["fixed_space_dim"] = space.dim
        report["blocks"] = blocks
        report["reconstruction_residual"] = decomposition.reconstruction_residual
        report["omega_matches_ancilla"] = omega_dist < 1e-8
        report["omega_distance"] = omega_dist
        report["effect_block_spectra"] = [
            [[float(v) for v in spec] for spec in per_outcome]
            for per_outcome in eb.spectra()
        ]
        _emit(report, args)
        ok = blocks == [(2, 2)] and omega_dist < 1e-8
        return EXIT_YES if ok else EXIT_NO

    raise QmeasError(f"unknown demo {args.name!r}")


# ---------------------------------------------------------------------------
# catalog export


def cmd_gen(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    report = _echo(args, tol)

    if args.list or args.name is None:
        report["catalog"] = {name: entry.description for name, entry in sorted(CATALOG.items())}
        _emit(report, args)
        return EXIT_YES

    entry = CATALOG.get(args.name)
    if entry is None:
        raise QmeasError(f"unknown catalog entry {args.name!r}; use --list")
    objects = entry.build()
    out_dir = args.out or "."
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for key, obj in sorted(objects.items()):
        path = os.path.join(out_dir, f"{args.name}.{key}.json")
        modelfile.save(obj, path)
        written.append(path)
    report["entry"] = args.name
    report["description"] = entry.description
    report["expected"] = {k: (list(v) if isinstance(v, tuple) else v)
                          for k, v in entry.expected.items()}
    report["written"] = written
    _emit(report, args)
    return EXIT_YES


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tol-atol", type=float, default=None,
                        help="equality tolerance (env QMEAS_TOL_ATOL overrides the default)")
    parser.add_argument("--tol-rank", type=float, default=None, help="rank threshold")
    parser.add_argument("--seed", type=int, default=0, help="seed for any randomized step")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="machine-readable report")
    fmt.add_argument("--human", action="store_true", help="aligned text report (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmeas",
                                     description="measurement models under the third law")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("classify", help="classify an observable file")
    p.add_argument("path")
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="run one verdict check on a model file")
    p.add_argument("what", choices=["channel-thirdlaw", "scheme-thirdlaw", "nondisturbance",
                                    "firstkind", "repeatable", "ideal", "extremal"])
    p.add_argument("path")
    p.add_argument("--against", default=None, help="observable file for nondisturbance")
    _add_common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table1", help="reproduce the five-property feasibility table")
    _add_common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("demo", help="run a named walkthrough")
    p.add_argument("name", choices=["purify", "luders-scheme", "decompose"])
    _add_common(p)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("gen", help="export catalog models as JSON files")
    p.add_argument("name", nargs="?", default=None)
    p.add_argument("--list", action="store_true", help="list catalog entries")
    p.add_argument("--out", default=None, help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0,) else 0
    try:
        return args.func(args)
    except QmeasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
