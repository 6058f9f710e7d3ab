import io
import json
import subprocess
import sys

import pytest

from accessorctl.cli import dumps, main
from accessorctl.config import random_config


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    text = out.getvalue()
    return code, (json.loads(text) if text.strip() else None), text


def write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def test_report_shape():
    code, rep, _ = run("conditions", "builtin:two_level_diag")
    assert set(rep) == {"version", "command", "config", "result", "timing"}
    assert rep["version"]["schema"] == 1 and rep["command"] == "conditions"
    assert code == 0


def test_conditions_examples(tmp_path):
    code, rep, _ = run("conditions", "builtin:two_level_diag")
    assert code == 0 and abs(abs(rep["result"]["rank"]["determinant_of_subset"]) - 1) < 1e-12
    cfg = random_config(3, 1, 0)
    code, rep, _ = run("conditions", write(tmp_path, "n3m1.json", cfg))
    assert code == 1 and rep["result"]["size"]["reason"] == "3 < 6"
    bad = random_config(2, 1, 0)
    bad["coupling"][0]["word"] = "iz"
    code, rep, _ = run("conditions", write(tmp_path, "bad.json", bad))
    assert code == 2 and "contains 'i'" in rep["result"]["error"]


def test_closure_examples(tmp_path):
    code, rep, _ = run("closure", "builtin:two_level_diag")
    assert code == 0 and rep["result"]["dimension"] == 15
    code, rep, _ = run("closure", "builtin:three_level_sec4")
    assert code == 0 and rep["result"]["dimension"] == 143
    cfg = random_config(2, 1, 0)
    cfg["coupling"] = []
    code, rep, _ = run("closure", write(tmp_path, "zero.json", cfg))
    assert code == 1 and rep["result"]["dimension"] == 4


def test_closure_oracle_and_flags():
    code, rep, _ = run("closure", "builtin:xy_only_sp4", "--oracle", "--workers", "2", "--cap", "100")
    assert code == 1
    assert rep["result"]["oracle"] == {"agree": True, "exact_dimension": 10, "numeric_dimension": 10, "target": 15}
    assert rep["result"]["workers"] == 2 and rep["config"]["options"]["workers"] == 2
    assert "oracle_wall_time" in rep["timing"]


def test_oracle_rejects_large_models(tmp_path):
    code, rep, _ = run("closure", write(tmp_path, "big.json", random_config(3, 3, 0)), "--oracle", "--cap", "3")
    assert code == 2 and "limited" in rep["result"]["error"]


def test_decouple_examples():
    code, rep, _ = run("decouple", "builtin:three_level_sec4")
    res = rep["result"]
    assert code == 0 and len(res["certificates"]) == 9 and res["layer_sizes"] == [4, 4, 1]
    assert all(c["residual"] < 1e-8 for c in res["certificates"])
    assert res["audit"]["total"] == 143 and res["audit"]["complete"]
    code, rep, _ = run("decouple", "builtin:two_level_diag")
    assert code == 0 and len(rep["result"]["certificates"]) == 3 and rep["result"]["audit"]["total"] == 15
    code, rep, _ = run("decouple", "builtin:rank_deficient")
    assert code == 1 and any("coupling rank 4 < 6" in e for e in rep["result"]["errors"])


def test_chain_strings_in_report():
    _, rep, _ = run("decouple", "builtin:two_level_diag")
    chain = rep["result"]["certificates"][0]["chain"]
    assert chain[0] == "drift" and chain[1].startswith("sub(ctrl:z@1*") and chain[-1].startswith("scale(")


def test_random_command(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("random", "--n", "2", "--m", "1", "--seed", "7", "--out", str(a))[0] == 0
    assert run("random", "--n", "2", "--m", "1", "--seed", "7", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    code, rep, _ = run("conditions", str(a))
    assert code == 0
    code, _, text = run("random", "--n", "2", "--m", "1", "--seed", "7")
    assert text == a.read_text(encoding="utf-8")


def test_random_three_level_feasible(tmp_path):
    feasible = 0
    for seed in range(100):
        path = write(tmp_path, f"r{seed}.json", random_config(3, 2, seed))
        feasible += run("conditions", path)[0] == 0
    assert feasible == 100


def test_reruns_identical_results():
    _, a, _ = run("closure", "builtin:three_level_sec4")
    _, b, _ = run("closure", "builtin:three_level_sec4")
    assert dumps(a["result"]) == dumps(b["result"])
    _, a, _ = run("decouple", "builtin:three_level_sec4")
    _, b, _ = run("decouple", "builtin:three_level_sec4")
    assert dumps(a["result"]) == dumps(b["result"])


@pytest.mark.parametrize("cmd", ["conditions", "closure", "decouple"])
def test_report_roundtrip(cmd):
    _, _, text = run(cmd, "builtin:two_level_diag")
    assert dumps(json.loads(text)) == text


def test_energy_shift_keeps_dimension(tmp_path):
    cfg = random_config(2, 1, 5)
    shifted = json.loads(json.dumps(cfg))
    shifted["system"]["energies"] = [e + 2.5 for e in cfg["system"]["energies"]]
    _, a, _ = run("closure", write(tmp_path, "a.json", cfg))
    _, b, _ = run("closure", write(tmp_path, "b.json", shifted))
    assert a["result"]["dimension"] == b["result"]["dimension"]


def test_shift_recorded_in_notes(tmp_path):
    cfg = random_config(2, 1, 5)
    cfg["system"]["energies"] = [3, 1]
    _, rep, _ = run("conditions", write(tmp_path, "s.json", cfg))
    assert rep["result"]["notes"] and "shifted" in rep["result"]["notes"][0]


def test_usage_errors_exit_two():
    assert main(["closure"], out=io.StringIO()) == 2
    assert main(["closure", "builtin:two_level_diag", "--cap", "0"], out=io.StringIO()) == 2
    assert main(["nope"], out=io.StringIO()) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "accessorctl", "conditions", "builtin:xy_only_sp4"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["result"]["rank"]["reason"] == "coupling rank 2 < 3"
