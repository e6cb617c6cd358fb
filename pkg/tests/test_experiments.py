from __future__ import annotations

import csv
import io
import json

import pytest
from hypothesis import given, strategies as st

from incidence import experiments as ex
from incidence.cli import EXIT_CAP, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main
from incidence.experiments import ExperimentConfig, closed_point_total, derive_seed, fit_exponent
from incidence.fields import make_field
from incidence.mpoly import dumps, fermat


# --------------------------------------------------------------------------- config


@pytest.mark.parametrize("bad", [{"samples": 0}, {"ext_bound": -1}, {"max_flags": 0},
                                 {"timeout": 0}, {"seed": -1}, {"seed": 1 << 64}])
def test_config_rejects_invalid(bad):
    with pytest.raises(ValueError):
        ExperimentConfig(experiment="gensm", **bad)


def test_config_roundtrip_and_extra_keys():
    cfg = ExperimentConfig.from_dict({"experiment": "codim", "part": "delta", "qs": [2, 3]})
    assert cfg.params == {"qs": [2, 3]}
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_config_m_value():
    assert ExperimentConfig(experiment="fano", m="inf").m_value == ex.INF
    assert ExperimentConfig(experiment="fano", m="4").m_value == 4


def test_field_for():
    assert ex.field_for(9) == make_field(3, 2)
    assert ex.field_for(7) == make_field(7)
    for q in (6, 12, 1):
        with pytest.raises(ValueError):
            ex.field_for(q)


# --------------------------------------------------------------------------- helpers


def test_derive_seed_deterministic_and_distinct():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    seeds = {derive_seed(1, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert derive_seed(1, 0) != derive_seed(2, 0)
    assert derive_seed(1, 0, 1) != derive_seed(1, 1, 0)


@given(st.floats(0.5, 5), st.floats(0.1, 10))
def test_fit_exponent_recovers_power(e, c):
    qs = [2, 3, 5, 7]
    assert fit_exponent(qs, [c * q ** e for q in qs]) == pytest.approx(e, abs=1e-9)


def test_closed_point_total_mobius():
    # one closed point of each degree 1..4: N_j = sum of e over e | j
    N = [sum(e for e in range(1, j + 1) if j % e == 0) for j in range(1, 5)]
    P, total = closed_point_total(N)
    assert P == [1, 1, 1, 1]
    assert total == 1 + 2 + 3 + 4
    # P^1 over GF(q): N_j = q^j + 1
    q = 3
    P, _ = closed_point_total([q ** j + 1 for j in range(1, 6)])
    assert P == [4, 3, 8, 18, 48]


@pytest.mark.parametrize("n,mu", [(1, 1), (2, -1), (3, -1), (4, 0), (6, 1), (12, 0), (30, -1)])
def test_mobius(n, mu):
    assert ex._mobius(n) == mu


def test_w_sweep_fraction_small():
    # universal family over GF(2), n=2, d=2, m=1: each of the 21 flags lies on 2^5 - 1 nonzero forms
    tot, w, w0, w2 = ex.w_sweep_fraction(2, 2, 1, make_field(2))
    assert tot == 21 * 31
    assert w == w0 and w2 == 0
    assert 0 < w < tot


def test_klein_quartic_rejects_other_degrees():
    with pytest.raises(ValueError):
        ex.klein_quartic(make_field(29), 2, 3)


def test_planted_flag_has_multiplicity():
    from incidence.smoothness import multiplicity

    for seed in range(20):
        F, flag = ex.planted_flag(make_field(5), 2, 4, 3, seed)
        assert multiplicity(F, flag) >= 3


# --------------------------------------------------------------------------- reports


def test_report_is_byte_identical_across_runs():
    cfg = ExperimentConfig(experiment="gensm", part="ii", field="5", n=2, d=3, m=3, samples=10,
                           ext_bound=2, seed=3)
    a, b = ex.run(cfg), ex.run(cfg)
    assert a.to_json() == b.to_json()
    assert "runtime_ms" not in json.loads(a.to_json())
    assert "runtime_ms" in json.loads(a.to_json(timing=True))


def test_report_csv_has_one_row_per_record():
    cfg = ExperimentConfig(experiment="gensm", part="i", field="5", n=2, d=4, m=4, samples=8,
                           ext_bound=1, seed=0)
    rep = ex.run(cfg)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == 8
    assert set(rows[0]) == {"sample", "found", "degree", "witness"}


def test_report_exit_codes():
    rep = ex.Report({})
    rep.check("a", True)
    assert rep.exit_code == 0
    rep.check("b", None)
    assert rep.exit_code == 2 and rep.undecided
    rep.check("c", False)
    assert rep.exit_code == 1 and not rep.passed


def test_fano_quadric_bundle():
    cfg = ExperimentConfig(experiment="fano", part="iii", field="5", n=3, d=2, m="inf",
                           params={"poly": "quadric"})
    rep = ex.run(cfg)
    assert rep.records[0]["Z"] == 12
    assert rep.records[0]["Y_inf"] == 72
    assert rep.passed


def test_predict_vs_count_negative_dimension():
    rep = ex.run(ExperimentConfig(experiment="predict_vs_count", field="5", n=2, d=4, m=4))
    assert rep.get("negative_dimension").passed


def test_predict_vs_count_fermat():
    rep = ex.run(ExperimentConfig(experiment="predict_vs_count", field="7", n=2, d=3, m=3, ext_bound=1,
                                  params={"poly": "fermat"}))
    assert rep.passed and rep.records[0]["geometric_total"] == 9


def test_unknown_experiment():
    with pytest.raises(ValueError):
        ex.run(ExperimentConfig(experiment="nope"))


# --------------------------------------------------------------------------- CLI


def test_cli_predict(capsys):
    assert main(["predict", "--n", "2", "--d", "3", "--m", "3"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["expected_dim"] == 0 and out["count"] == 9


def test_cli_sample_enumerate_smooth(tmp_path, capsys):
    assert main(["sample", "--field", "7", "--n", "2", "--d", "3", "--seed", "4"]) == EXIT_OK
    path = tmp_path / "f.poly"
    path.write_text(capsys.readouterr().out)
    path.write_text(dumps(fermat(make_field(7), 2, 3)))
    assert main(["enumerate", "--field", "7", "--poly", str(path), "--scheme", "Y", "--m", "3"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["count"] == 9
    assert main(["smooth", "--poly", str(path), "--m", "3", "--all-flags"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["summary"] == {"smooth": 9, "W0": 0, "W2": 0}
    flag = out["flags"][0]["flag"]
    assert main(["smooth", "--poly", str(path), "--m", "3", "--flag", flag]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["flags"][0]["rank"] == 3 and out["flags"][0]["multiplicity"] >= 3


def test_cli_enumerate_inline_and_csv(capsys):
    text = dumps(fermat(make_field(7), 2, 3)).strip().replace("\n", ";")
    assert main(["enumerate", "--poly", text, "--scheme", "X", "--csv"]) == EXIT_OK
    lines = capsys.readouterr().out.split()
    assert len(lines) == 9


def test_cli_enumerate_extension(capsys):
    text = dumps(fermat(make_field(2), 2, 3)).strip().replace("\n", ";")
    assert main(["enumerate", "--poly", text, "--scheme", "X", "--ext-deg", "2"]) == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["count"] == 9


def test_cli_input_errors(tmp_path, capsys):
    text = dumps(fermat(make_field(7), 2, 3)).strip().replace("\n", ";")
    assert main(["enumerate", "--field", "5", "--poly", text]) == EXIT_INPUT
    assert main(["enumerate", "--n", "3", "--poly", text]) == EXIT_INPUT
    assert main(["sample", "--field", "6", "--n", "2", "--d", "3"]) == EXIT_INPUT
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["verify", "gensm", "--config", str(bad)]) == EXIT_INPUT
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "fano"}))
    assert main(["verify", "gensm", "--config", str(cfg)]) == EXIT_INPUT
    cfg.write_text(json.dumps({"experiment": "gensm", "samples": 0}))
    assert main(["verify", "gensm", "--config", str(cfg)]) == EXIT_INPUT
    capsys.readouterr()


def test_cli_verify_pass_and_outputs(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "double_count", "field": "2", "n": 2, "d": 2, "m": 1}))
    out, table = tmp_path / "r.json", tmp_path / "r.csv"
    assert main(["verify", "double_count", "--config", str(cfg), "--out", str(out), "--csv", str(table)]) == EXIT_OK
    first = out.read_text()
    assert json.loads(first)["passed"] is True
    assert main(["verify", "double_count", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert out.read_text() == first


def test_cli_verify_fail(tmp_path, capsys):
    # over GF(5) most plane cubics have a rational flex, so a 0% emptiness bound fails
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "gensm", "part": "i", "field": "5", "n": 2, "d": 3, "m": 3,
                               "samples": 10, "ext_bound": 1, "max_fraction": 0.0}))
    assert main(["verify", "gensm", "--config", str(cfg)]) == EXIT_FAIL
    capsys.readouterr()


def test_cli_verify_cap(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "double_count", "field": "3", "n": 2, "d": 3, "m": 3,
                               "max_polys": 1000}))
    assert main(["verify", "double_count", "--config", str(cfg)]) == EXIT_CAP
    assert "cap_hit" in json.loads(capsys.readouterr().out)


def test_cli_verify_seed_override(capsys):
    assert main(["verify", "gensm", "--seed", "5"]) in (EXIT_OK, EXIT_FAIL, EXIT_CAP)
    out = json.loads(capsys.readouterr().out)
    assert out["config"]["seed"] == 5
