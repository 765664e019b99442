import json

import numpy as np
import pytest

from k3lyap import cli, clifford as cl
from k3lyap.quadlat import standard_k3_space


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_families_all(capsys):
    code, out, _ = run(capsys, "families", "--all")
    assert code == 0
    for v in ["1/212", "1/104", "1/10", "1/192", "1/156", "1/294", "1/6", "1/2"]:
        assert f" {v} " in out
    assert len(out.strip().splitlines()) == 9


def test_families_json(capsys):
    code, out, _ = run(capsys, "families", "quartic", "--format", "json")
    data = json.loads(out)
    assert code == 0
    assert data["schema_version"] == cli.SCHEMA_VERSION
    assert data["command"] == "k3lyap families quartic --format json"
    assert data["result"][0]["lambda1"] == "1/212"


def test_families_errors(capsys):
    assert run(capsys, "families", "nosuch")[0] == 2
    assert run(capsys, "families")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


@pytest.mark.parametrize("n", [1, 3])
def test_clifford_check(capsys, n):
    code, out, _ = run(capsys, "clifford-check", "--n", str(n), "--format", "json")
    rep = json.loads(out)["result"]
    assert code == 0 and rep["passed"] and rep["dim_cl10_even"] == 2 ** n


def test_clifford_check_guard(capsys):
    code, _, err = run(capsys, "clifford-check", "--n", "9")
    assert code == 2 and "exponential" in err


def test_weights(capsys):
    code, out, _ = run(capsys, "weights", "--type", "B", "--rank", "4", "--format", "json")
    spin = json.loads(out)["result"]["tables"]["spin"]
    assert code == 0 and {r["multiplicity"] for r in spin} == {4}
    code, out, _ = run(capsys, "weights", "--type", "D", "--rank", "3", "--format", "json")
    spin = json.loads(out)["result"]["tables"]["spin"]
    assert {r["multiplicity"] for r in spin} == {2}
    assert run(capsys, "weights", "--type", "B", "--rank", "1")[0] == 2


SIM = ["simulate", "--preset", "modular", "--rep", "sym2", "--time", "2000", "--burn-in",
       "100", "--trajectories", "2", "--seed", "5", "--quiet"]


def test_simulate_deterministic_bytes(capsys):
    _, a, _ = run(capsys, *SIM)
    _, b, _ = run(capsys, *SIM)
    assert a == b
    data = json.loads(a)["result"]
    est = data["estimate"]
    assert [e["multiplicity"] for e in est["exponents"]] == [1, 1, 1]
    assert est["halved_convention"]["values"][0] == est["raw_convention"]["values"][0] / 2
    assert "checks" in data


def test_simulate_threads_env_does_not_change_output(capsys, monkeypatch):
    _, a, _ = run(capsys, *SIM)
    monkeypatch.setenv("K3LYAP_THREADS", "2")
    _, b, _ = run(capsys, *SIM)
    assert a == b


def test_simulate_checkpoints_on_stderr(capsys):
    argv = [x for x in SIM if x != "--quiet"]
    code, out, err = run(capsys, *argv)
    assert code == 0 and "trajectory 1/2" in err and "[k3lyap]" not in out


def test_simulate_errors(capsys, tmp_path):
    assert run(capsys, "simulate", "--rep", "custom", "--rep-file", str(tmp_path / "no.json"))[0] == 2
    assert run(capsys, "simulate", "--rep", "nosuch")[0] == 2
    assert run(capsys, "simulate", "--preset", "nosuch")[0] == 2
    assert run(capsys, "simulate", "--time", "10", "--burn-in", "100")[0] == 2


def test_simulate_custom_rep(capsys, tmp_path):
    # sym2 of the modular generators, written out by hand
    S = [[0, 0, 1], [0, -1, 0], [1, 0, 0]]
    T = [[1, 1, 1], [0, 1, 2], [0, 0, 1]]
    form = [[0, 0, -1], [0, "1/2", 0], [-1, 0, 0]]
    f = tmp_path / "rep.json"
    f.write_text(json.dumps({"form": form, "generators": {"S": S, "T": T},
                             "relations": [[["S", 2]], [["T", 1], ["S", 1]] * 3]}))
    code, out, _ = run(capsys, "simulate", "--rep", "custom", "--rep-file", str(f), "--time",
                       "3000", "--burn-in", "100", "--trajectories", "2", "--quiet")
    assert code == 0, out
    data = json.loads(out)["result"]
    assert data["representation"]["signature"] == [2, 1, 0]
    vals = data["estimate"]["raw_convention"]["values"]
    assert vals == pytest.approx([1, 0, -1], abs=0.05)


def write_rep(path, gens, form=None, relations=()):
    form = form or [[str(x) for x in row] for row in standard_k3_space(3).gram]
    path.write_text(json.dumps({"form": form, "generators": gens,
                                "relations": [list(map(list, r)) for r in relations]}))


def test_ks_lift_round_trip(capsys, tmp_path):
    rng = np.random.default_rng(0)
    alg = cl.CliffordAlgebra(3)
    gens = {}
    for label in "AB":
        h = cl.CliffordGroupElement.from_vectors(alg, [alg.random_vector(rng) for _ in range(4)])
        gens[label] = [[str(x) for x in row] for row in cl.conjugation_matrix(h)]
    f = tmp_path / "rep.json"
    write_rep(f, gens, relations=[[("A", 1), ("A", -1)]])
    code, out, _ = run(capsys, "ks-lift", "--input", str(f))
    rep = json.loads(out)["result"]
    assert code == 0
    assert rep["dimension"] == 16 and rep["max_residual"] < 1e-9
    assert rep["relation_signs"] == [1]


def test_ks_lift_relation_sign_audit(capsys, tmp_path):
    # rotation by pi in the (e3, e4) plane: order two below, order four in Spin
    R = [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, -1, 0, 0], [0, 0, 0, -1, 0], [0, 0, 0, 0, 1]]
    f = tmp_path / "rep.json"
    write_rep(f, {"R": R}, relations=[[("R", 2)]])
    code, out, _ = run(capsys, "ks-lift", "--input", str(f))
    rep = json.loads(out)["result"]
    assert code == 0 and rep["relation_signs"] == [-1] and rep["index_2_cover_required"]


def test_ks_lift_rejects_nonorthogonal(capsys, tmp_path):
    f = tmp_path / "rep.json"
    M = np.eye(5, dtype=int).tolist()
    M[0][1] = 1
    write_rep(f, {"A": M})
    assert run(capsys, "ks-lift", "--input", str(f))[0] == 3
    g = tmp_path / "bad_form.json"
    write_rep(g, {"A": np.eye(2, dtype=int).tolist()}, form=[[1, 0], [0, -1]])
    assert run(capsys, "ks-lift", "--input", str(g))[0] == 3


def test_rep_file_unknown_keys(capsys, tmp_path):
    f = tmp_path / "rep.json"
    f.write_text(json.dumps({"form": [[1]], "generators": {}, "colour": "red"}))
    assert run(capsys, "ks-lift", "--input", str(f))[0] == 2
