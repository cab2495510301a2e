import json

from qmeas import modelfile
from qmeas.cli import EXIT_ERROR, EXIT_NO, EXIT_YES, main
from qmeas.core import State, luders_instrument
from qmeas.models import (
    build_extremal_model,
    build_ideality_example,
    build_nondisturbance_example,
    build_shift_scheme,
    completely_unsharp_pair,
    extremal_instrument,
    pointer_observable,
    random_constrained_channel,
    random_low_rank_preparation,
    trivial_swap_scheme,
)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    return code, json.loads(out), err


class TestClassify:
    def test_unsharp_pair(self, tmp_path, capsys):
        path = tmp_path / "obs.json"
        modelfile.save(completely_unsharp_pair(), str(path))
        code, report, _ = run_json(capsys, "classify", str(path))
        assert code == EXIT_YES
        c = report["classification"]
        assert c["is_completely_unsharp"] and c["is_commutative"]
        assert not c["is_sharp"] and not c["is_norm1"]
        assert c["per_effect_ranks"] == [2, 2]

    def test_wrong_kind_is_an_error(self, tmp_path, capsys):
        path = tmp_path / "state.json"
        modelfile.save(State.complete_mixture(2), str(path))
        code, _, err = run(capsys, "classify", str(path))
        assert code == EXIT_ERROR
        assert "error:" in err

    def test_missing_file_is_an_error(self, capsys):
        code, _, err = run(capsys, "classify", "no-such-file.json")
        assert code == EXIT_ERROR
        assert "error:" in err


class TestCheck:
    def test_channel_thirdlaw_yes(self, tmp_path, capsys):
        path = tmp_path / "ch.json"
        modelfile.save(random_constrained_channel(3, 1), str(path))
        code, report, _ = run_json(capsys, "check", "channel-thirdlaw", str(path))
        assert code == EXIT_YES
        assert report["constrained"] is True
        assert report["min_output_eigenvalue"] > 0

    def test_channel_thirdlaw_no(self, tmp_path, capsys):
        path = tmp_path / "prep.json"
        modelfile.save(random_low_rank_preparation(3, 1, 2), str(path))
        code, report, _ = run_json(capsys, "check", "channel-thirdlaw", str(path))
        assert code == EXIT_NO
        assert report["constrained"] is False

    def test_channel_thirdlaw_wrong_kind(self, tmp_path, capsys):
        path = tmp_path / "obs.json"
        modelfile.save(completely_unsharp_pair(), str(path))
        code, _, err = run(capsys, "check", "channel-thirdlaw", str(path))
        assert code == EXIT_ERROR

    def test_scheme_thirdlaw_yes_and_no(self, tmp_path, capsys):
        good = tmp_path / "good.json"
        modelfile.save(build_extremal_model(), str(good))
        code, report, _ = run_json(capsys, "check", "scheme-thirdlaw", str(good))
        assert code == EXIT_YES and report["constrained"]

        bad = tmp_path / "bad.json"
        modelfile.save(
            trivial_swap_scheme(State.pure([1.0, 0.0]), pointer_observable(2)), str(bad)
        )
        code, report, _ = run_json(capsys, "check", "scheme-thirdlaw", str(bad))
        assert code == EXIT_NO and not report["constrained"]

    def test_nondisturbance_requires_against(self, tmp_path, capsys):
        _, _, inst = build_nondisturbance_example()
        path = tmp_path / "inst.json"
        modelfile.save(inst, str(path))
        code, _, err = run(capsys, "check", "nondisturbance", str(path))
        assert code == EXIT_ERROR
        assert "--against" in err

    def test_nondisturbance_yes(self, tmp_path, capsys):
        _, other, inst = build_nondisturbance_example()
        ipath, opath = tmp_path / "inst.json", tmp_path / "other.json"
        modelfile.save(inst, str(ipath))
        modelfile.save(other, str(opath))
        code, report, _ = run_json(
            capsys, "check", "nondisturbance", str(ipath), "--against", str(opath)
        )
        assert code == EXIT_YES
        assert report["residual"] < 1e-10

    def test_firstkind_accepts_scheme_file(self, tmp_path, capsys):
        path = tmp_path / "scheme.json"
        modelfile.save(build_shift_scheme(3, (0.5, 0.3, 0.2)), str(path))
        code, report, _ = run_json(capsys, "check", "firstkind", str(path))
        assert code == EXIT_YES
        assert report["first_kind"] is True

    def test_repeatable_no(self, tmp_path, capsys):
        path = tmp_path / "inst.json"
        modelfile.save(luders_instrument(completely_unsharp_pair()), str(path))
        code, report, _ = run_json(capsys, "check", "repeatable", str(path))
        assert code == EXIT_NO
        assert report["repeatable"] is False

    def test_ideal_yes_and_not_applicable(self, tmp_path, capsys):
        _, inst = build_ideality_example()
        path = tmp_path / "ideal.json"
        modelfile.save(inst, str(path))
        code, report, _ = run_json(capsys, "check", "ideal", str(path))
        assert code == EXIT_YES and report["ideal"] == "true"

        path2 = tmp_path / "cu.json"
        modelfile.save(luders_instrument(completely_unsharp_pair()), str(path2))
        code, report, _ = run_json(capsys, "check", "ideal", str(path2))
        assert code == EXIT_NO and report["ideal"] == "not_applicable"

    def test_extremal_reports_ranks(self, tmp_path, capsys):
        path = tmp_path / "inst.json"
        modelfile.save(extremal_instrument(), str(path))
        code, report, _ = run_json(capsys, "check", "extremal", str(path))
        assert code == EXIT_YES
        assert report["extremal"] is True
        assert report["kraus_ranks"] == [2, 2]
        assert report["gram_rank"] == 8 == report["product_count"]


class TestTable1:
    def test_json_reproduces_expected_grid(self, capsys):
        code, report, _ = run_json(capsys, "table1")
        assert code == EXIT_YES
        assert report["match"] is True
        expected = {
            "non_disturbance": ("x", "x", "x", "yes"),
            "first_kind": ("x", "x", "x", "yes"),
            "repeatable": ("x", "x", "x", "x"),
            "ideal": ("x", "x", "x", "x"),
            "extremal": ("x", "yes", "yes", "yes"),
        }
        assert report["columns"] == ["small-rank", "sharp", "norm-1", "completely-unsharp"]
        for row, wants in expected.items():
            for column, want in zip(report["columns"], wants):
                cell = report["rows"][row][column]
                assert cell["verdict"] == want, (row, column)
                if want == "yes":
                    assert cell["witness_verified"] is True
                else:
                    assert cell["anchor"]

    def test_human_rendering(self, capsys):
        code, out, _ = run(capsys, "table1")
        assert code == EXIT_YES
        assert "match: True" in out
        assert "completely-unsharp" in out


class TestDemos:
    def test_purify(self, capsys):
        code, report, _ = run_json(capsys, "demo", "purify")
        assert code == EXIT_YES
        assert report["copies"] == 1 == report["minimal_copies_check"]
        assert report["fidelity"] > 1.0 - 1e-9

    def test_luders_scheme(self, capsys):
        code, report, _ = run_json(capsys, "demo", "luders-scheme")
        assert code == EXIT_YES
        assert report["constrained"] is True
        assert report["instrument_residual"] < 1e-9

    def test_decompose(self, capsys):
        code, report, _ = run_json(capsys, "demo", "decompose")
        assert code == EXIT_YES
        assert report["blocks"] == [[2, 2]]
        assert report["omega_matches_ancilla"] is True
        assert report["reconstruction_residual"] < 1e-7


class TestGen:
    def test_list(self, capsys):
        code, report, _ = run_json(capsys, "gen", "--list")
        assert code == EXIT_YES
        assert len(report["catalog"]) == 7
        assert "extremal-two-qubit" in report["catalog"]

    def test_export_and_reload(self, tmp_path, capsys):
        code, report, _ = run_json(
            capsys, "gen", "luders-unsharp-qubit", "--out", str(tmp_path)
        )
        assert code == EXIT_YES
        assert len(report["written"]) == 3
        for path in report["written"]:
            obj = modelfile.load(path)
            assert obj is not None
        obs_path = tmp_path / "luders-unsharp-qubit.observable.json"
        code, rep, _ = run_json(capsys, "classify", str(obs_path))
        assert code == EXIT_YES
        assert rep["classification"]["is_completely_unsharp"]

    def test_unknown_entry(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "nope", "--out", str(tmp_path))
        assert code == EXIT_ERROR
        assert "use --list" in err


class TestPlumbing:
    def test_bad_subcommand(self, capsys):
        assert main(["frobnicate"]) == EXIT_ERROR
        capsys.readouterr()

    def test_no_arguments(self, capsys):
        assert main([]) == EXIT_ERROR
        capsys.readouterr()

    def test_env_tolerance_is_echoed(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QMEAS_TOL_ATOL", "0.001")
        path = tmp_path / "obs.json"
        modelfile.save(completely_unsharp_pair(), str(path))
        code, report, _ = run_json(capsys, "classify", str(path))
        assert code == EXIT_YES
        assert report["tolerances"]["atol_equality"] == 0.001

    def test_flag_overrides_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QMEAS_TOL_ATOL", "0.001")
        path = tmp_path / "obs.json"
        modelfile.save(completely_unsharp_pair(), str(path))
        code, report, _ = run_json(
            capsys, "classify", str(path), "--tol-atol", "1e-9"
        )
        assert code == EXIT_YES
        assert report["tolerances"]["atol_equality"] == 1e-9
