import csv
import io
import json
from fractions import Fraction

import pytest

from doflab.cli import CERTIFY_COLUMNS, CURVE_COLUMNS, curve_rows, main
from doflab.genie_chain import builtin_script


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def as_json(text):
    return json.loads(text)


class TestBounds:
    def test_2x5(self, capsys):
        code, out, _ = run(capsys, "bounds", "--k", "4", "--mt", "2", "--mr", "5")
        d = as_json(out)
        assert code == 0
        assert (d["decomposition"], d["counting"], d["status"]) == ("10/7", "7/5", "proven_decomposition")

    def test_8x21(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "4", "--mt", "8", "--mr", "21")
        assert as_json(out)["best_known"] == "168/29"

    def test_1x1(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "4", "--mt", "1", "--mr", "1")
        assert as_json(out)["decomposition"] == "1/2"

    def test_csv(self, capsys):
        _, out, _ = run(capsys, "bounds", "--k", "4", "--mt", "2", "--mr", "5", "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert rows[0]["best_known"] == "10/7"

    @pytest.mark.parametrize(
        "argv",
        [
            ["bounds", "--k", "3", "--mt", "2", "--mr", "5"],
            ["bounds", "--k", "4", "--mt", "2"],
            ["bounds", "--k", "x"],
            ["nosuch"],
        ],
    )
    def test_usage_errors(self, capsys, argv):
        assert run(capsys, *argv)[0] == 2


class TestChain:
    @pytest.mark.parametrize(
        "script, seed, bound",
        [("ex3_3x8", "11", "24/11"), ("kuser_5_4_15", "1", "60/19"), ("five_to_one_2x5", "1", "10/7")],
    )
    def test_builtin(self, capsys, script, seed, bound):
        code, out, _ = run(capsys, "chain", "--script", script, "--seed", seed)
        d = as_json(out)
        assert code == 0
        assert d["bound"] == bound and d["degraded"] is False
        assert d["trace"] and d["inequalities"]

    @pytest.mark.parametrize("name, bound", [("alg1", "15/8"), ("alg2", "10/7")])
    def test_algorithms(self, capsys, name, bound):
        _, out, _ = run(capsys, "chain", "--script", name)
        assert as_json(out)["bound"] == bound

    def test_algorithm_other_point(self, capsys):
        _, out, _ = run(capsys, "chain", "--script", "alg2", "--mt", "3", "--mr", "7")
        assert as_json(out)["bound"] == "21/10"

    def test_scale(self, capsys):
        _, out, _ = run(capsys, "chain", "--script", "chain_8_21", "--scale", "2")
        assert as_json(out)["bound"] == str(Fraction(8 * 42, 29))

    def test_script_file(self, capsys, tmp_path):
        p = tmp_path / "s.json"
        p.write_text(json.dumps(builtin_script("ex1_2x5").to_json()))
        _, out, _ = run(capsys, "chain", "--script", str(p), "--backend", "rational")
        assert as_json(out)["bound"] == "10/7"

    def test_degraded_exit_code(self, capsys, tmp_path):
        # intersecting a term with itself cannot span the transmit space
        steps = [
            {"action": "expose", "rx": 2, "target": 1, "genie": {"generic": [[1, 1]]}, "produces": "O"},
            {"action": "intersect", "rx": 2, "target": 1, "against": "O", "genie": {"generic": [[1, 1]]}},
        ]
        p = tmp_path / "s.json"
        p.write_text(json.dumps({"name": "self", "topology": "full_ic", "K": 4, "M_T": 2, "M_R": 5, "steps": steps}))
        code, out, _ = run(capsys, "chain", "--script", str(p))
        d = as_json(out)
        assert code == 3 and d["degraded"] is True
        assert d["trace"][-1]["action"] == "cap"

    def test_sweep(self, capsys):
        code, out, _ = run(capsys, "chain", "--script", "ex1_2x5", "--sweep", "3", "--seed", "4")
        d = as_json(out)
        assert code == 0 and len(d["runs"]) == 3
        assert len({r["seed"] for r in d["runs"]}) == 3

    def test_unknown_script(self, capsys):
        assert run(capsys, "chain", "--script", "nope")[0] == 2

    def test_missing_script(self, capsys):
        assert run(capsys, "chain")[0] == 2

    def test_out_file(self, capsys, tmp_path):
        p = tmp_path / "o.json"
        code, out, _ = run(capsys, "chain", "--script", "ex1_2x5", "--out", str(p))
        assert code == 0 and out == ""
        assert json.loads(p.read_text())["bound"] == "10/7"

    def test_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("DOF_LAB_SEED", "17")
        _, out, _ = run(capsys, "chain", "--script", "ex1_2x5")
        assert as_json(out)["seed"] == 17

    def test_bad_env_seed(self, capsys, monkeypatch):
        monkeypatch.setenv("DOF_LAB_SEED", "abc")
        assert run(capsys, "chain", "--script", "ex1_2x5")[0] == 2


class TestCertify:
    def test_small_sweep(self, capsys):
        code, out, _ = run(capsys, "certify", "--regime", "half", "--max", "9")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0
        assert list(rows[0]) == CERTIFY_COLUMNS
        assert {(int(r["M"]), int(r["N"])) for r in rows} == {(2, 5), (3, 7), (4, 9)}
        assert all(r["pass"] == "true" for r in rows)

    def test_empty(self, capsys):
        code, out, _ = run(capsys, "certify", "--regime", "half", "--max", "4")
        assert code == 0 and out.strip() == ",".join(CERTIFY_COLUMNS)

    def test_json(self, capsys):
        _, out, _ = run(capsys, "certify", "--regime", "p3", "--max", "8", "--format", "json")
        d = as_json(out)
        assert [(r["M"], r["N"], r["pass"]) for r in d] == [(3, 8, True)]
        assert d[0]["steps"]

    def test_bad_regime(self, capsys):
        assert run(capsys, "certify", "--regime", "c9")[0] == 2


class TestAlign:
    def test_k_user(self, capsys):
        code, out, _ = run(capsys, "align", "--k", "4")
        d = as_json(out)
        assert code == 0 and d["verification"]["pass"] is True and d["d"] == 3

    def test_four_to_one(self, capsys):
        code, out, _ = run(capsys, "align", "--design", "four_to_one", "--case", "3/5", "--precoders")
        d = as_json(out)
        assert code == 0 and d["d"] == 2 and "precoders" in d

    def test_bad_case(self, capsys):
        assert run(capsys, "align", "--design", "four_to_one", "--case", "1/2")[0] == 2


class TestCurve:
    def test_rows(self, capsys):
        code, out, _ = run(capsys, "curve", "--k", "4", "--max", "8")
        rows = {r["gamma"]: r for r in csv.DictReader(io.StringIO(out))}
        assert code == 0
        assert rows["3/8"]["dstar_over_N"] == rows["3/8"]["decomposition_over_N"] == "3/11"
        assert rows["1/2"]["best_known_over_N"] == "1/3"

    def test_header(self, capsys):
        _, out, _ = run(capsys, "curve", "--k", "4", "--max", "3")
        assert out.splitlines()[0] == ",".join(CURVE_COLUMNS)

    def test_single_crossover(self):
        rows = curve_rows(4, 30)
        signs = [Fraction(r["counting_over_N"]) >= Fraction(r["decomposition_over_N"]) for r in rows]
        # counting dominates for small gamma, then decomposition does for good
        flips = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
        assert signs[0] and not signs[-1] and flips == 1
        assert all(r["regime"] == (1 if s else 2) for r, s in zip(rows, signs))

    def test_needs_k(self, capsys):
        assert run(capsys, "curve")[0] == 2


class TestMultilook:
    def test_default_example(self, capsys):
        _, out, _ = run(capsys, "multilook")
        d = as_json(out)
        assert d["l_sigma"] == 3 and d["dims"] == [1, 2, 1, 1, 3, 2]

    def test_dims(self, capsys):
        _, out, _ = run(capsys, "multilook", "--dims", "1,2,1,1,3,2", "--m", "3")
        assert as_json(out)["l_sigma"] == 3

    def test_input_file(self, capsys, tmp_path):
        p = tmp_path / "m.json"
        p.write_text(json.dumps({"ambient": 2, "subspaces": [[[1, 0]], [[1, 0]], [[0, 1]]]}))
        _, out, _ = run(capsys, "multilook", "--input", str(p))
        assert as_json(out)["l_sigma"] == 1

    def test_dims_need_m(self, capsys):
        assert run(capsys, "multilook", "--dims", "1,2")[0] == 2


class TestDeterminism:
    def test_repeat(self, capsys):
        a = run(capsys, "chain", "--script", "ex3_3x8", "--seed", "11")[1]
        b = run(capsys, "chain", "--script", "ex3_3x8", "--seed", "11")[1]
        assert a == b

    def test_serial_vs_parallel(self, capsys):
        argv = ["chain", "--script", "ex3_3x8", "--seed", "11", "--sweep", "4"]
        a = run(capsys, *argv, "--jobs", "1")[1]
        b = run(capsys, *argv, "--jobs", "3")[1]
        assert a == b
