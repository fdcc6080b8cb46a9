import json

import numpy as np
import pytest

from cohkit import io
from cohkit.cli import main
from cohkit.sampling import random_theorem4_instance
from cohkit.sio import KrausChannel

S = 1 / np.sqrt(2)


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(obj if isinstance(obj, str) else io.dumps(obj))
        return str(path)
    return write


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None), out


@pytest.fixture
def params_file(files):
    return files("params.json", {"d": 3, "gamma": 0.3, "lambda1": 0.6, "c": 0.7,
                                 "phi": [[0.6, 0], [0.8, 0]], "psi": [[0.8, 0], [0.6, 0]]})


def test_majorize_exit_codes(capsys, files):
    u, b = files("u.json", [0.5, 0.5]), files("b.json", [1, 0])
    code, rep, _ = run(capsys, "majorize", u, b)
    assert code == 0 and rep["majorized"] is True
    assert rep["prefix_sums"]["y"] == [1.0, 1.0]
    assert run(capsys, "majorize", b, u)[0] == 1
    assert run(capsys, "majorize", files("bad.json", "{nope"), u)[0] == 2


def test_transfer_birkhoff_dmaj(capsys, files):
    x, y = files("x.json", [0.6, 0.4]), files("y.json", [0.8, 0.2])
    code, rep, _ = run(capsys, "transfer", x, y)
    assert code == 0 and np.allclose(rep["matrix"]["rows"], [[2 / 3, 1 / 3], [1 / 3, 2 / 3]])
    m = files("m.json", rep["matrix"])
    code, rep, _ = run(capsys, "birkhoff", m)
    assert code == 0 and sorted(t["perm"] for t in rep["terms"]) == [[1, 2], [2, 1]]
    assert run(capsys, "transfer", y, files("e.json", [0.5, 0.5]))[0] == 1
    e0, e1, h = files("e0.json", [1, 0]), files("e1.json", [0, 1]), files("h.json", [0.5, 0.5])
    assert run(capsys, "dmaj", e0, h, e0, e1)[0] == 1
    code, rep, _ = run(capsys, "dmaj", e0, h, e0, h)
    assert code == 0 and rep["witness"] is not None


def test_verify_channel(capsys, files):
    ident = files("id.json", io.channel_to_json(KrausChannel([np.eye(2)])))
    deph = files("deph.json", io.channel_to_json(KrausChannel([np.diag([1, 0]), np.diag([0, 1])])))
    for f in (ident, deph):
        code, rep, _ = run(capsys, "verify-channel", f)
        assert code == 0 and rep == {"class": "SIO", "completeness_residual": 0.0}
    H = np.array([[S, S], [S, -S]])
    assert run(capsys, "verify-channel", files("h.json", io.channel_to_json(KrausChannel([H]))))[0] == 1
    incomplete = files("inc.json", json.dumps({"kraus": [[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]}))
    assert run(capsys, "verify-channel", incomplete)[0] == 2


def test_pure_transform(capsys, files):
    plus, zero = files("plus.json", io.state_to_json([S, S])), files("zero.json", io.state_to_json([1, 0]))
    code, rep, _ = run(capsys, "pure-transform", plus, zero)
    assert code == 0 and len(rep["channel"]["kraus"]) == 2
    code, rep, _ = run(capsys, "pure-transform", zero, plus)
    assert code == 1 and rep["channel"] is None


def _instance(files, name, phi, psi, alpha, beta):
    return files(name, {k: io.state_to_json(v) for k, v in
                        zip(("phi", "psi", "alpha", "beta"), (phi, psi, alpha, beta))})


def test_pair_check_identity_emits_certificate(capsys, files, tmp_path):
    a, b = [0.6, 0.8], [0.8, 0.6]
    inst = _instance(files, "inst.json", a, b, a, b)
    code, rep, _ = run(capsys, "pair-check", inst, "--emit-cert")
    assert code == 0 and rep["found"] and "certificate" in rep
    cert = str(tmp_path / "cert.json")
    assert run(capsys, "pair-check", inst, "--emit-cert", cert)[0] == 0
    code, rep, _ = run(capsys, "pair-check", inst, cert)
    assert code == 0 and rep["verified"] is True


def test_pair_check_rank_mismatch(capsys, files):
    inst = _instance(files, "inst.json", [0.6, 0.8], [0.8, 0.6], [1, 0], [0.8, 0.6])
    assert run(capsys, "pair-check", inst)[0] == 3


def test_pair_check_negative_and_brute_force(capsys, files):
    inst = _instance(files, "inst.json", [S, S], [S, S], [1, 0], [0, 1])
    code, rep, _ = run(capsys, "pair-check", inst, "--brute-force", "--max-kraus", "2")
    assert code == 1 and rep["found"] is False and rep["brute_force"] is False


def test_pair_check_rejected_certificate(capsys, files, tmp_path):
    a, b = [0.6, 0.8], [0.8, 0.6]
    cert = str(tmp_path / "cert.json")
    run(capsys, "pair-check", _instance(files, "i.json", a, b, a, b), "--emit-cert", cert)
    other = _instance(files, "o.json", a, b, b, a)
    code, rep, _ = run(capsys, "pair-check", other, cert)
    assert code == 1 and rep["condition"] == "condition (i)"


def test_distill_and_certificate_roundtrip(capsys, params_file, tmp_path):
    inst, cert = tmp_path / "inst.json", tmp_path / "cert.json"
    code, rep, _ = run(capsys, "distill", params_file, "--emit-instance", inst, "--emit-cert", cert)
    assert code == 0 and rep["ok"]
    assert sum(rep["weights"]["p"]) == pytest.approx(1, abs=1e-12)
    assert rep["weights"]["p_sum"] == pytest.approx(1, abs=1e-12)
    code, rep, _ = run(capsys, "pair-check", inst, cert)
    assert code == 0 and rep["verified"]


def test_distill_out_of_range_gamma(capsys, files):
    bad = files("bad.json", {"d": 3, "gamma": float(np.pi / 3), "lambda1": 0.6, "c": 0.7,
                             "phi": [[0.6, 0], [0.8, 0]], "psi": [[0.8, 0], [0.6, 0]]})
    assert run(capsys, "distill", bad)[0] == 2


def test_distill_sweep(capsys, params_file, tmp_path):
    code, reps, text = run(capsys, "distill", params_file, "--sweep", "gamma=0.1:0.7:0.1",
                           "--out-dir", tmp_path / "out")
    assert code == 0 and len(reps) == 7
    assert [r["params"]["gamma"] for r in reps] == pytest.approx(np.arange(1, 8) / 10)
    assert len(list((tmp_path / "out").iterdir())) == 7
    # parallel workers merge in grid order, byte for byte
    code, _, text2 = run(capsys, "distill", params_file, "--sweep", "gamma=0.1:0.7:0.1", "--jobs", "2")
    assert code == 0 and text2 == text
    assert run(capsys, "distill", params_file, "--sweep", "d=1:2:1")[0] == 2


def test_theorem4(capsys, files, rng):
    kw = random_theorem4_instance(2, rng)
    obj = {k: io.state_to_json(kw[k]) for k in ("phi", "psi", "alpha", "beta", "tau")}
    obj.update(d11=io.matrix_to_json(kw["d11"]), d21=io.matrix_to_json(kw["d21"]),
               c=float(kw["c"]), p1=float(kw["p1"]))
    code, rep, _ = run(capsys, "theorem4", files("t4.json", obj))
    assert code == 0 and rep["residuals"]["off_corner"] < 1e-9
    assert run(capsys, "theorem4", files("bad.json", {"c": 0.5}))[0] == 2


def test_qubit_ico(capsys):
    assert run(capsys, "qubit-ico", "1,0,0", "0.5,0,0")[0] == 0
    assert run(capsys, "qubit-ico", "0,0,0.5", "0.3,0,0")[0] == 1
    assert run(capsys, "qubit-ico", "1,1,0", "0,0,0")[0] == 2
    assert run(capsys, "qubit-ico", "1,0", "0,0,0")[0] == 2


def test_mixed_to_pure(capsys, files):
    rho = files("rho.json", io.density_to_json(np.array([[0.5, 0.1], [0.1, 0.5]])))
    zero = files("zero.json", io.state_to_json([1, 0]))
    assert run(capsys, "mixed-to-pure", rho, zero)[0] == 1
    code, rep, _ = run(capsys, "mixed-to-pure", "--partition", "search", rho, zero)
    assert code == 0 and rep["partition"] == "search"


def test_global_flags_and_determinism(capsys, params_file):
    first = run(capsys, "--tol", "1e-9", "--seed", "3", "distill", params_file)[2]
    second = run(capsys, "distill", params_file, "--seed", "3", "--tol", "1e-9")[2]
    assert first == second
    assert run(capsys, "--tol", "-1", "distill", params_file)[0] == 2
    assert run(capsys, "--zero-threshold", "0", "distill", params_file)[0] == 2


def test_environment_fallback(monkeypatch):
    from cohkit import config
    monkeypatch.setenv("COHKIT_TOL", "1e-7")
    monkeypatch.setenv("COHKIT_ZERO_THRESHOLD", "1e-12")
    tol = config._from_env()
    assert tol.tol == 1e-7 and tol.zero == 1e-12


def test_missing_subcommand_is_usage_error(capsys):
    assert main([]) == 2


def test_pair_check_rank_drop_uses_oracle(capsys, files):
    inst = _instance(files, "inst.json", [S, S], [S, -S], [1, 0], [1, 0])
    code, rep, _ = run(capsys, "pair-check", inst, "--brute-force")
    assert code == 0 and rep["brute_force"] is True and "hypothesis" in rep
