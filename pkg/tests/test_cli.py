import json
import subprocess
import sys

import pytest

from falsetheta import cli
from falsetheta import qseries as qs
from falsetheta import thetasum as ts

SCHEMA = {"value", "err_est", "params", "cutoffs", "status"}


def run(argv, capsys, monkeypatch=None):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def as_json(text):
    rep = json.loads(text)
    assert SCHEMA <= set(rep)
    assert set(rep["value"]) == {"re", "im"}
    return rep


class TestParsing:
    @pytest.mark.parametrize("text,z", [
        ("0.0+1.0i", 1j), ("0.3-0.8i", 0.3 - 0.8j), ("2i", 2j), ("i", 1j),
        ("-0.5+i", -0.5 + 1j), ("1.5", 1.5), ("1e-3+2e-1j", 1e-3 + 0.2j),
    ])
    def test_complex(self, text, z):
        assert cli.parse_complex(text) == z

    def test_bad_complex(self):
        with pytest.raises(cli.InputError):
            cli.parse_complex("one+i")

    def test_cusp(self):
        c = cli.parse_cusp("2/5", 3)
        assert (c.h, c.k, c.p) == (2, 5, 3)
        with pytest.raises(ValueError):
            cli.parse_cusp("2/4")


class TestEval:
    def test_F1_matches_library(self, capsys):
        code, out, _ = run(["eval", "--what", "F1", "--p", "2", "--tau", "0.0+1.0i"], capsys)
        assert code == 0
        rep = as_json(out)
        # bit-identical to the library call under the default configuration
        assert complex(rep["value"]["re"], rep["value"]["im"]) == qs.eval_F1(1j, 2, 1e-15)

    def test_K(self, capsys):
        code, out, _ = run(["eval", "--what", "K", "--cusp", "1/2"], capsys)
        assert code == 0
        assert as_json(out)["value"]["re"] == pytest.approx(3.0, abs=1e-14)

    def test_p1_rejected(self, capsys):
        code, _, err = run(["eval", "--what", "F1", "--p", "1", "--tau", "1i"], capsys)
        assert code == 2
        assert "p >= 2" in err

    def test_lower_half_plane_rejected(self, capsys):
        code, _, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "0.1-0.2i"], capsys)
        assert code == 2

    def test_unknown_target(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["eval", "--what", "G", "--p", "2", "--tau", "1i"])
        assert exc.value.code == 2

    def test_theta_sum_cutoffs(self, capsys):
        code, out, _ = run(["eval", "--what", "E1sum", "--p", "2", "--tau", "0.3+0.8i"], capsys)
        rep = as_json(out)
        assert code == 0
        assert rep["cutoffs"]["terms"] > 0
        val = complex(rep["value"]["re"], rep["value"]["im"])
        assert val == ts.E1_theta_sum(2, 0.3 + 0.8j, 1e-15)

    def test_radial(self, capsys):
        code, out, _ = run(["eval", "--what", "F", "--p", "3", "--cusp", "1/3", "--t", "0.1"], capsys)
        rep = as_json(out)
        assert rep["params"]["tau"]["im"] == pytest.approx(0.1 / (2 * 3.141592653589793))

    def test_shimura_bad_parameters(self, capsys):
        code, _, _ = run(["eval", "--what", "shimura", "--nu", "0", "--A", "3", "--h", "1",
                          "--N", "4", "--tau", "1i"], capsys)
        assert code == 2


class TestConfig:
    def test_env_precision(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_PRECISION, "6")
        code, out, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "1i"], capsys)
        assert as_json(out)["err_est"] == pytest.approx(1e-6)

    def test_flag_beats_env(self, capsys, monkeypatch):
        monkeypatch.setenv(cli.ENV_PRECISION, "6")
        code, out, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "1i", "--digits", "12"], capsys)
        assert as_json(out)["err_est"] == pytest.approx(1e-12)

    def test_config_file(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# run settings\ndigits = 9\nformat = plain\n")
        code, out, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "1i", "--config", str(cfg)], capsys)
        assert code == 0
        assert out.startswith("status: OK")
        assert "err_est: 1.000e-09" in out

    def test_bad_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("colour = blue\n")
        code, _, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "1i", "--config", str(cfg)], capsys)
        assert code == 2

    def test_tolerance_floor(self, capsys):
        code, _, _ = run(["eval", "--what", "E1", "--p", "2", "--tau", "1i", "--quad-tol", "1e-16"], capsys)
        assert code == 2

    def test_csv(self, capsys):
        code, out, _ = run(["eval", "--what", "F", "--p", "2", "--tau", "1i", "--format", "csv"], capsys)
        head, row = out.strip().splitlines()
        assert head == "re,im,err_est,status"
        assert float(row.split(",")[0]) == qs.eval_F(1j, 2)


class TestVerify:
    @pytest.mark.parametrize("argv", [
        ["--identity", "sums", "--h", "1", "--k", "3", "--p", "2"],
        ["--identity", "sumsmatch", "--h", "1", "--k", "1", "--p", "3"],
        ["--identity", "wantvanish", "--h", "3", "--k", "4", "--p", "3"],
        ["--identity", "alsowant", "--h", "2", "--k", "3", "--p", "4", "--n", "2"],
    ])
    def test_exact(self, capsys, argv):
        code, out, _ = run(["verify"] + argv, capsys)
        rep = as_json(out)
        assert code == 0 and rep["status"] == "PASS"
        assert rep["params"]["certificate"].startswith("exact")

    def test_off_branch_is_invalid(self, capsys):
        code, _, _ = run(["verify", "--identity", "wantvanish", "--h", "1", "--k", "3", "--p", "3"], capsys)
        assert code == 2

    def test_decomposition(self, capsys):
        code, out, _ = run(["verify", "--identity", "decomposition", "--p", "3", "--grid", "default"], capsys)
        rep = as_json(out)
        assert code == 0
        assert rep["params"]["points"] == 20
        assert rep["value"]["re"] < 1e-12

    def test_cocycle(self, capsys):
        code, out, _ = run(["verify", "--identity", "cocycle-E1", "--p", "2", "--matrix", "1,0,24,1",
                            "--tau", "0.0+1.0i"], capsys)
        assert code == 0
        assert as_json(out)["value"]["re"] < 1e-5

    def test_cocycle_bad_matrix(self, capsys):
        code, _, _ = run(["verify", "--identity", "cocycle-E1", "--p", "2", "--matrix", "1,0,12,1",
                          "--tau", "1i"], capsys)
        assert code == 2

    @pytest.mark.parametrize("ident", ["lemma61", "prop81", "shuffle", "lowering", "shimura-transform",
                                       "m2-dual", "limit-eq", "weyl"])
    def test_numeric(self, capsys, ident):
        argv = ["verify", "--identity", ident]
        if ident == "weyl":
            argv += ["--p", "2"]
        code, out, _ = run(argv, capsys)
        rep = as_json(out)
        assert code == 0, rep
        assert rep["value"]["re"] < rep["params"]["threshold"]

    def test_fail_exit_code(self, capsys, monkeypatch):
        monkeypatch.setattr(cli.qs, "weyl_residual", lambda tau, p, tol: 1.0)
        code, out, _ = run(["verify", "--identity", "weyl", "--p", "2"], capsys)
        assert code == 3
        assert as_json(out)["status"] == "FAIL"


class TestAsympt:
    def test_table(self, capsys):
        code, out, _ = run(["asympt", "--which", "F1", "--cusp", "1/3", "--p", "2", "--order", "2"], capsys)
        rep = as_json(out)
        assert code == 0
        assert [r["m"] for r in rep["table"]] == [0, 1, 2]
        assert rep["table"][0]["im"] == pytest.approx(-3.0)

    def test_fit_F1(self, capsys):
        code, out, _ = run(["asympt", "--which", "F1", "--cusp", "1/1", "--p", "2", "--order", "2", "--fit"], capsys)
        rep = as_json(out)
        assert code == 0
        assert rep["params"]["slope"] >= 3
        assert rep["params"]["companion_slope"] >= 2.8

    def test_fit_F2(self, capsys):
        code, out, _ = run(["asympt", "--which", "F2", "--cusp", "1/2", "--p", "3", "--order", "1", "--fit"], capsys)
        assert code == 0
        assert as_json(out)["params"]["slope"] >= 2

    def test_fit_window(self, capsys):
        # at 1/3 the coefficients are large and t = 0.1 is not yet asymptotic
        argv = ["asympt", "--which", "F1", "--cusp", "1/3", "--p", "2", "--order", "2", "--fit"]
        code, out, _ = run(argv, capsys)
        assert code == 3
        code, out, _ = run(argv + ["--tmax", "0.01"], capsys)
        assert code == 0
        assert as_json(out)["params"]["slope"] >= 2.8
        code, _, _ = run(argv + ["--tmax", "2"], capsys)
        assert code == 2

    def test_order_guard(self, capsys):
        code, _, err = run(["asympt", "--which", "F1", "--cusp", "1/3", "--p", "2", "--order", "40"], capsys)
        assert code == 2

    def test_not_reduced(self, capsys):
        code, _, _ = run(["asympt", "--which", "F1", "--cusp", "2/4", "--p", "2"], capsys)
        assert code == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "falsetheta", "eval", "--what", "K", "--cusp", "1/3"],
                         capture_output=True, text=True, check=True)
    assert json.loads(out.stdout)["status"] == "OK"
