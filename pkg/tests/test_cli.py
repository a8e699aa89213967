import json
from pathlib import Path

import numpy as np
import pytest

from suslovkit.cli import main


@pytest.fixture
def params_file(tmp_path):
    def write(name, a1, a2):
        f = tmp_path / f"{name}.json"
        f.write_text(json.dumps({"I1": 3.0, "I2": 2.0, "I3": 1.0, "K1": 0.5,
                                 "K3": 1.0, "a1": a1, "a2": a2, "a3": 1.0}))
        return str(f)
    return write


def _load_report(path):
    return json.loads(Path(path).read_text())


def _read_csv(path):
    lines = [l for l in Path(path).read_text().splitlines()
             if l and not l.startswith("#")]
    cols = lines[0].split(",")
    data = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    return cols, data


def _strip_timestamp(text):
    return "\n".join(l for l in text.splitlines() if '"generated_at"' not in l)


class TestAnalyze:
    def test_recurrent_regime(self, params_file, tmp_path, capsys):
        out = str(tmp_path / "a.json")
        rc = main(["analyze", "--params", params_file("p", 1.0, 0.0),
                   "--out", out])
        assert rc == 0
        stdout = capsys.readouterr().out
        assert "Saddle" in stdout and "LinearCenterPair" in stdout
        doc = _load_report(out)
        assert doc["schema_version"] == 1
        assert doc["predicates"]["classA_measure_exists"] is True
        assert doc["predicates"]["positive_c1_measure_exists"] is False
        kinds = [e["classification"] for e in doc["equilibria"]]
        assert kinds == ["LinearCenterPair", "Saddle", "LinearCenterPair"]

    def test_euler_regime(self, params_file, tmp_path):
        out = str(tmp_path / "a.json")
        assert main(["analyze", "--params", params_file("p", 0.0, 0.0),
                     "--out", out]) == 0
        doc = _load_report(out)
        assert doc["predicates"]["positive_c1_measure_exists"] is True
        assert doc["predicates"]["classA_measure_exists"] is True

    def test_two_sink_regime(self, params_file, tmp_path):
        out = str(tmp_path / "a.json")
        assert main(["analyze", "--params", params_file("p", 1.0, 1.0),
                     "--out", out]) == 0
        doc = _load_report(out)
        kinds = [e["classification"] for e in doc["equilibria"]]
        assert kinds == ["SourceSinkPair", "Saddle", "SourceSinkPair"]
        assert doc["predicates"]["classA_measure_exists"] is False

    def test_config_echo(self, params_file, tmp_path):
        out = str(tmp_path / "a.json")
        main(["analyze", "--params", params_file("p", 1.0, 0.0), "--out", out])
        doc = _load_report(out)
        assert doc["config"]["params"]["I1"] == 3.0
        assert doc["command"] == "analyze"


class TestErrorPaths:
    def test_missing_file(self, capsys):
        assert main(["analyze", "--params", "/definitely/not/here.json"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_json_parse_diagnostics(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"I1": 3.0,,}')
        assert main(["analyze", "--params", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line" in err  # parse errors carry position diagnostics

    def test_inertia_ordering(self, tmp_path, capsys):
        f = tmp_path / "p.json"
        f.write_text(json.dumps({"I1": 1.0, "I2": 2.0, "I3": 3.0, "K1": 0.5,
                                 "K3": 1.0, "a1": 0.0, "a2": 0.0}))
        assert main(["analyze", "--params", str(f)]) == 2
        assert "ordering" in capsys.readouterr().err

    def test_bad_omega0(self, params_file, capsys):
        assert main(["simulate", "--params", params_file("p", 1.0, 0.0),
                     "--omega0", "1,2"]) == 2
        capsys.readouterr()

    def test_params_required(self, capsys):
        assert main(["analyze"]) == 2
        capsys.readouterr()


class TestSimulate:
    def test_equilibrium_constant_output(self, params_file, tmp_path):
        out = tmp_path / "s.csv"
        rc = main(["simulate", "--params", params_file("p", 1.0, 0.0),
                   "--omega0", "0,0,1", "--T", "10", "--samples", "11",
                   "--out", str(out)])
        assert rc == 0
        _, rows = _read_csv(out)
        np.testing.assert_allclose(rows[:, 1:4], [[0.0, 0.0, 1.0]] * len(rows),
                                   atol=1e-9)

    def test_conserved_columns(self, params_file, tmp_path):
        out = tmp_path / "s.csv"
        main(["simulate", "--params", params_file("p", 1.0, 0.0),
              "--omega0", "1,1,1", "--T", "50", "--samples", "26",
              "--out", str(out)])
        cols, rows = _read_csv(out)
        E = rows[:, cols.index("E")]
        F = rows[:, cols.index("F")]
        assert np.max(np.abs(E - E[0])) <= 1e-9 * abs(E[0])
        assert np.max(np.abs(F - F[0])) <= 1e-6 * max(abs(F[0]), 1e-30)

    def test_reconstruct_constraint_column(self, params_file, tmp_path):
        out = tmp_path / "s.csv"
        main(["simulate", "--params", params_file("p", 1.0, 1.0),
              "--omega0", "0.5,-0.2,0.8", "--T", "20", "--samples", "21",
              "--reconstruct", "--out", str(out)])
        cols, rows = _read_csv(out)
        resid = rows[:, cols.index("constraint_residual")]
        assert np.max(np.abs(resid)) <= 1e-9
        q = rows[:, cols.index("qw"):cols.index("qw") + 4]
        np.testing.assert_allclose(np.linalg.norm(q, axis=1), 1.0, atol=1e-9)

    def test_csv_round_trip_exact(self, params_file, tmp_path):
        out = tmp_path / "s.csv"
        main(["simulate", "--params", params_file("p", 1.0, 0.0),
              "--omega0", "0.3,-0.4,0.5", "--T", "5", "--samples", "6",
              "--out", str(out)])
        from suslovkit import simulate, validate
        p = validate(3.0, 2.0, 1.0, 0.5, 1.0, a1=1.0, a2=0.0)
        traj = simulate(p, np.array([0.3, -0.4, 0.5]), 5.0,
                        record_times=np.linspace(0.0, 5.0, 6)[1:])
        _, rows = _read_csv(out)
        np.testing.assert_array_equal(rows[:, 1:4], traj.states)

    def test_json_format(self, params_file, tmp_path):
        out = tmp_path / "s.json"
        main(["simulate", "--params", params_file("p", 1.0, 0.0),
              "--omega0", "1,1,1", "--T", "5", "--format", "json",
              "--out", str(out)])
        doc = _load_report(out)
        assert doc["columns"][:4] == ["t", "omega1", "omega2", "omega3"]
        assert doc["config"]["energy_drift"] <= 1e-9


class TestPortrait:
    def test_byte_stable_reruns(self, params_file, tmp_path):
        pf = params_file("p", 1.0, 0.0)
        d1, d2 = str(tmp_path / "r1"), str(tmp_path / "r2")
        for d in (d1, d2):
            assert main(["portrait", "--params", pf, "--T", "6",
                         "--samples", "3", "--seed", "11", "--out", d]) == 0
        m1 = _load_report(Path(d1) / "manifest.json")
        for name in m1["files"]:
            b1 = (Path(d1) / name).read_bytes()
            b2 = (Path(d2) / name).read_bytes()
            assert b1 == b2, f"{name} not byte-stable"
        t1 = _strip_timestamp((Path(d1) / "manifest.json").read_text())
        t2 = _strip_timestamp((Path(d2) / "manifest.json").read_text())
        assert t1 == t2

    def test_contains_backward_and_forward_arcs(self, params_file, tmp_path):
        d = tmp_path / "port"
        main(["portrait", "--params", params_file("p", 1.0, 0.0), "--T", "4",
              "--samples", "2", "--seed", "1", "--out", str(d)])
        _, rows = _read_csv(d / "traj_000.csv")
        t = rows[:, 0]
        assert t[0] == pytest.approx(-4.0) and t[-1] == pytest.approx(4.0)
        assert np.all(np.diff(t) > 0)


class TestVerify:
    def test_classA_pass(self, params_file, tmp_path):
        out = str(tmp_path / "v.json")
        rc = main(["verify", "--params", params_file("p", 1.0, 0.0),
                   "--samples", "2000", "--out", out])
        assert rc == 0
        doc = _load_report(out)
        assert doc["pass"] is True
        assert doc["residual_check"]["max_residual"] <= 1e-6
        assert doc["plane_invariance_check"]["max_defect"] <= 1e-10

    def test_witness_regime(self, params_file, tmp_path):
        out = str(tmp_path / "v.json")
        rc = main(["verify", "--params", params_file("p", 1.0, 1.0),
                   "--out", out])
        assert rc == 0
        doc = _load_report(out)
        assert doc["predicates"]["classA_measure_exists"] is False
        assert doc["divergence_witness"]["max_divergence"] > 0

    def test_fixture_target(self, tmp_path):
        out = str(tmp_path / "v.json")
        assert main(["verify", "example2d", "--samples", "2000",
                     "--out", out]) == 0
        doc = _load_report(out)
        assert doc["residual_check"]["max_residual"] <= 1e-8

    def test_deterministic_report(self, params_file, tmp_path):
        pf = params_file("p", 1.0, 0.0)
        o1, o2 = str(tmp_path / "v1.json"), str(tmp_path / "v2.json")
        for o in (o1, o2):
            main(["verify", "--params", pf, "--samples", "500", "--seed", "7",
                  "--out", o])
        assert _strip_timestamp(Path(o1).read_text()) == \
            _strip_timestamp(Path(o2).read_text())


class TestTransport:
    def test_fixture_box(self, tmp_path):
        out = str(tmp_path / "t.json")
        rc = main(["transport", "example2d", "--T", "1", "--samples", "50000",
                   "--seed", "5", "--out", out])
        assert rc == 0
        doc = _load_report(out)
        r = doc["report"]
        assert abs(r["mu_A"] - 24.5) <= 3.0 * r["se_mu_A"]

    def test_suslov_invariant_density(self, params_file, tmp_path):
        out = str(tmp_path / "t.json")
        rc = main(["transport", "--params", params_file("p", 1.0, 0.0),
                   "--T", "2", "--samples", "20000", "--seed", "5",
                   "--out", out])
        assert rc == 0

    def test_contraction_detected_and_grows(self, params_file, tmp_path):
        # uniform density is not transported by the a2 != 0 flow; the deficit
        # must grow with the horizon
        pf = params_file("p", 1.0, 1.0)
        errs = []
        for i, t in enumerate(("0.5", "1.5")):
            out = str(tmp_path / f"t{i}.json")
            rc = main(["transport", "--params", pf, "--density", "uniform",
                       "--T", t, "--samples", "20000", "--seed", "5",
                       "--out", out])
            assert rc == 1
            errs.append(_load_report(out)["report"]["relative_error"])
        assert errs[0] < 0 and errs[1] < 0
        assert abs(errs[1]) > abs(errs[0])

    def test_custom_box(self, params_file, tmp_path):
        out = str(tmp_path / "t.json")
        rc = main(["transport", "--params", params_file("p", 1.0, 0.0),
                   "--T", "1", "--samples", "10000", "--seed", "2",
                   "--box", "0.9,1.1,0.9,1.1,0.9,1.1", "--out", out])
        assert rc == 0
        doc = _load_report(out)
        assert doc["config"]["box"] == [[0.9, 1.1]] * 3
