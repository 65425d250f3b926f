import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from clusterlab import cli
from clusterlab.cluster_net import save
from clusterlab.optimizer import SolveTrace

from conftest import DB_PERIMETER, island_net


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, out=buf)
    return code, buf.getvalue()


@pytest.fixture(scope="module")
def circle_out(tmp_path_factory):
    d = tmp_path_factory.mktemp("circle")
    code, text = run(["solve", "--scenario", "circle", "--area", "3.14159265", "--out", str(d)])
    return code, text, d


def test_solve_circle(circle_out):
    code, text, d = circle_out
    assert code == 0
    report = json.loads((d / "report.json").read_text())
    assert report["status"] == "pass"
    assert report["functionals"]["perimeter"] == pytest.approx(2 * math.pi, rel=0.003)
    assert {p.name for p in d.iterdir()} == {"net.json", "report.json", "net.svg"}
    assert "circle: converged" in text


def test_report_matches_schema(circle_out):
    report = json.loads((circle_out[2] / "report.json").read_text())
    jsonschema.validate(report, cli.REPORT_SCHEMA)
    assert report["config"]["seed"] == 0
    assert report["config"]["scenario"]["areas"] == [3.14159265]


def test_schema_rejects_bad_status(circle_out):
    report = json.loads((circle_out[2] / "report.json").read_text())
    report["status"] = "maybe"
    with pytest.raises(jsonschema.ValidationError):
        cli.validate_report(report)


def test_solve_is_byte_identical(circle_out, tmp_path):
    code, _ = run(["solve", "--scenario", "circle", "--area", "3.14159265", "--out", str(tmp_path)])
    assert code == 0
    for name in ("net.json", "report.json", "net.svg"):
        assert (tmp_path / name).read_bytes() == (circle_out[2] / name).read_bytes()


def test_solve_double_bubble(tmp_path):
    code, _ = run(["solve", "--scenario", "double_bubble", "--areas", "1,1", "--out", str(tmp_path)])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["functionals"]["perimeter"] == pytest.approx(DB_PERIMETER, rel=0.005)
    assert round(DB_PERIMETER, 4) == 6.3591
    assert report["junctions"]["count"] == 2
    assert report["junctions"]["max_deviation_deg"] < 1.0
    assert all(p["pass"] for p in report["predicates"].values())
    assert report["certificates"]["eps_beta_witness"]["beta"] == pytest.approx(1.0)


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "circle", "areas": [2.0], "seed": 5, "out": str(tmp_path / "o")}))
    code, _ = run(["solve", "--config", str(cfg), "--areas", "pi"])
    assert code == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["functionals"]["targets"] == [math.pi]
    assert report["config"]["seed"] == 5


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "circle", "colour": "red"}))
    assert run(["solve", "--config", str(cfg)])[0] == 2


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["solve", "--scenario", "nope"],
    ["solve", "--scenario", "circle", "--areas", "one"],
    ["solve", "--scenario", "circle", "--density", "{bad json"],
    ["solve", "--scenario", "circle", "--density", '{"kind": "grushin", "alpha": -1}'],
    ["solve", "--scenario", "circle", "--max-iters", "0"],
    ["probe", "dini", "--modulus", "wavy"],
    ["oracle", "fermat", "0,0", "0,0", "2,0"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert run(argv + (["--out", str(tmp_path)] if argv[0] == "solve" and len(argv) > 2 else []))[0] == 2


def test_solver_fault_exit_3(monkeypatch, tmp_path):
    def broken(net, field, cfg):
        return net, SolveTrace(cfg.seed, status="topology_fault", message="forced for test")

    monkeypatch.setattr(cli, "solve", broken)
    code, _ = run(["solve", "--scenario", "circle", "--out", str(tmp_path)])
    assert code == 3
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["status"] == "fault"
    assert any("forced for test" in n for n in report["notices"])


def test_verify_converged_fixture(circle_out):
    code, text = run(["verify", str(circle_out[2] / "net.json")])
    assert code == 0
    report = json.loads(text)
    assert report["kind"] == "verify" and report["status"] == "pass"
    jsonschema.validate(report, cli.REPORT_SCHEMA)


def test_verify_island_violation(tmp_path):
    path = tmp_path / "island.json"
    path.write_bytes(save(island_net()))
    code, text = run(["verify", str(path)])
    assert code == 1
    report = json.loads(text)
    assert report["predicates"]["no_island"]["pass"] is False


def test_verify_missing_certificate(circle_out, capsys):
    net = str(circle_out[2] / "net.json")
    code, _ = run(["verify", net, "--density", '{"kind": "radial_power", "p": 1}', "--check", "regularity"])
    assert code == 2
    assert "MissingCertificate" in capsys.readouterr().err


def test_verify_certs_from_report(circle_out):
    d = circle_out[2]
    code, text = run(["verify", str(d / "net.json"), "--certs", str(d / "report.json"), "--check", "regularity"])
    assert code == 0
    assert json.loads(text)["regularity"]["gamma_theory"] == pytest.approx(0.5)


def test_certificates_round_trip_through_report(circle_out):
    growth, eps = cli.certificates_from_report(str(circle_out[2] / "report.json"))
    assert growth.r_eta == math.inf and growth.eta == 2.0
    assert eps.beta == 1.0


def test_verify_parse_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  nope")
    assert run(["verify", str(bad)])[0] == 2


def test_probe_growth():
    code, text = run(["probe", "growth", "--density", '{"kind": "grushin", "alpha": 1}'])
    assert code == 0
    assert json.loads(text)["eta"] == pytest.approx(1.5, abs=0.03)


def test_probe_epsbeta(circle_out):
    code, text = run(["probe", "epsbeta", str(circle_out[2] / "net.json"), "--center", "0,5", "--r-beta", "0.1"])
    assert code == 0
    assert json.loads(text)["beta"] == pytest.approx(1.0)


@pytest.mark.parametrize("modulus,verdict", [("power:0.5", "converges"), ("invlog", "diverges")])
def test_probe_dini(modulus, verdict):
    code, text = run(["probe", "dini", "--modulus", modulus])
    assert code == 0 and json.loads(text)["verdict"] == verdict


def test_oracles():
    code, text = run(["oracle", "fermat", "0,0", "1,0", "0.5,0.8"])
    assert code == 0
    assert json.loads(text)["total_euclidean_length"] > 0
    code, text = run(["oracle", "ltheta", str(math.pi / 2)])
    assert code == 0 and "L" in json.loads(text)


def test_render_command(circle_out, tmp_path):
    out = tmp_path / "x.svg"
    assert run(["render", str(circle_out[2] / "net.json"), "--out", str(out)])[0] == 0
    assert out.read_text() == (circle_out[2] / "net.svg").read_text()


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("CLUSTERLAB_THREADS", "1")
    assert run(["probe", "dini", "--modulus", "power:1"])[0] == 0
    monkeypatch.setenv("CLUSTERLAB_THREADS", "zero")
    assert run(["probe", "dini", "--modulus", "power:1"])[0] == 2


def test_console_script_version():
    res = subprocess.run([sys.executable, "-m", "clusterlab.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("clusterlab ")
