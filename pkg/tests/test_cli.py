import json

import numpy as np
import pytest

from loccbound import cli
from loccbound.ensembles import catalog, parse, serialize
from loccbound.exceptions import SolverError


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_bell_exit_and_chain(capsys):
    code, out, _ = run(capsys, "analyze", "--catalog", "bell4", "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["verdict"] == "RULED OUT"
    pure = next(r for r in doc["reports"] if r["inequalityId"] == "pure")
    assert pure["boundValues"] == [2.0, 2.0, 2.0] and pure["verdict"] == "VIOLATED"
    assert doc["feasibility"]["certified"] is False


def test_json_header_echoes_effective_config(capsys):
    _, out, _ = run(capsys, "feasibility", "--catalog", "product-basis", "--tol-feas", "1e-6", "--format", "json")
    doc = json.loads(out)
    assert doc["command"] == "feasibility" and doc["reportSchemaVersion"] == 1
    assert doc["config"]["feas_tol"] == 1e-6 and doc["config"]["rank_tol"] == 1e-9
    assert doc["config"]["bisect_tol"] == 1e-5 and doc["config"]["starts"] == 64
    assert doc["input"] == {"catalog": "product-basis", "params": {}}
    assert len(doc["feasibility"]["povm"]) == 4


def test_measures_on_bell_file(tmp_path, capsys):
    s2 = 1 / np.sqrt(2)
    f = tmp_path / "psi.json"
    f.write_text(json.dumps({"schemaVersion": 1, "dims": [2, 2],
                             "states": [{"name": "phi+", "vector": [[s2, 0], [0, 0], [0, 0], [s2, 0]]}]}))
    code, out, _ = run(capsys, "measures", "--file", str(f), "--format", "json")
    row = json.loads(out)["states"][0]
    assert code == 0
    assert row["R"] == pytest.approx(1) and row["E_R"] == pytest.approx(1) and row["G"] == pytest.approx(1)
    assert row["d_ppt"] == pytest.approx(2, abs=1e-6)


def test_text_report_stamps_each_link(capsys):
    code, out, _ = run(capsys, "bound", "--catalog", "product-basis", "--which", "pure")
    assert code == 0
    assert "N = 4 <= D/avg(1+R) = 4  SATISFIED" in out
    assert "config: rank_tol=1e-09" in out


def test_bound_pure_on_mixed_input_is_input_error(capsys):
    code, _, err = run(capsys, "bound", "--catalog", "entangled-support-pair", "--which", "pure")
    assert code == 2 and "rank-one" in err


def test_catalog_params_and_out(tmp_path, capsys):
    out = tmp_path / "pair.json"
    code, _, _ = run(capsys, "catalog", "entangled-support-pair", "--alpha", "0.25", "--param", "beta=0.75",
                     "--out", str(out))
    assert code == 0
    e = parse(out.read_bytes())
    assert out.read_bytes() == serialize(catalog("entangled-support-pair", {"alpha": 0.25, "beta": 0.75}))
    assert e.metadata["alpha"] == "0.25"


def test_entangled_support_pair_analysis(capsys):
    code, out, _ = run(capsys, "analyze", "--catalog", "entangled-support-pair", "--alpha", "0.5", "--beta", "0.5",
                       "--mixed-starts", "1", "--mixed-iters", "1", "--format", "json")
    doc = json.loads(out)
    assert [p["isProductSpanned"] for p in doc["productSpanned"]] == [False, False]
    sm = next(r for r in doc["reports"] if r["inequalityId"] == "support-max")
    assert sm["verdict"] == "SATISFIED"
    assert code == 1 and doc["verdict"] == "RULED OUT"


def test_invalid_inputs_exit_2(tmp_path, capsys):
    assert run(capsys, "analyze", "--file", str(tmp_path / "missing.json"))[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run(capsys, "feasibility", "--file", str(bad))
    assert code == 2 and "line 1" in err
    assert run(capsys, "catalog", "entangled-support-pair", "--alpha", "0")[0] == 2
    with pytest.raises(SystemExit) as info:
        cli.run(["catalog", "bell4", "--param", "oops"])
    assert info.value.code == 2


def test_solver_failure_exit_3(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise SolverError("stalled", bracket=(0.25, 0.5))

    monkeypatch.setattr(cli, "ppt_povm_feasibility", boom)
    code, _, err = run(capsys, "feasibility", "--catalog", "bell4")
    assert code == 3 and "bracket (0.25, 0.5)" in err


@pytest.mark.parametrize("command", ["schmidt", "subspace-max"])
def test_per_state_commands(command, capsys):
    code, out, _ = run(capsys, command, "--catalog", "entangled-support-pair", "--starts", "8", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    rows = doc.get("states") or doc.get("supports")
    assert len(rows) == 2


def test_projection_method_flag(capsys):
    code, out, _ = run(capsys, "feasibility", "--catalog", "product-basis", "--method", "projection", "--format",
                       "json")
    assert code == 0 and json.loads(out)["feasibility"]["method"] == "projection"


def test_in_process_determinism(capsys):
    args = ("bound", "--catalog", "entangled-support-pair", "--which", "optimized-mixed", "--seed", "3",
            "--mixed-starts", "1", "--mixed-iters", "3", "--format", "json")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]
