import json
import math
import os

import numpy as np
import pytest

from dqe.cli import RunConfig, config_sha1, main, parse_config, run
from dqe.errors import ParameterError


def _write_cfg(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _rates_config(**over):
    data = {
        "mode": "rates",
        "drive": {"omega_Z": 1.0, "Omega": 0.1, "nu": 1.0},
        "noise": {"kind": "white", "S0": 1.0, "W_x": 1e-3, "W_y": 1e-3,
                  "cutoff": 2.5},
    }
    data.update(over)
    return data


def _read_csv(path):
    header = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return comments, body[0].split(","), [l.split(",") for l in body[1:]]


# ---------------------------------------------------------------------------
# parsing


def test_parse_fills_defaults_and_round_trips():
    rc = parse_config(_rates_config())
    assert rc.drive["phi"] == 0.0
    assert rc.noise["S0"] == 1.0
    assert rc.output["path"] == "rates.csv"
    again = parse_config(rc.to_dict())
    assert again == rc
    assert config_sha1(again) == config_sha1(rc)


def test_parse_rejects_unknown_keys():
    with pytest.raises(ParameterError, match="unknown top-level"):
        parse_config(_rates_config(extra={}))
    bad = _rates_config()
    bad["drive"]["omega"] = 2.0
    with pytest.raises(ParameterError, match="unknown key"):
        parse_config(bad)


def test_parse_requires_mode_sections():
    with pytest.raises(ParameterError, match="requires"):
        parse_config({"mode": "rates",
                      "drive": {"omega_Z": 1.0, "Omega": 0.1, "nu": 1.0}})


def test_parse_validates_noise_kind():
    bad = _rates_config()
    bad["noise"]["kind"] = "pink"
    with pytest.raises(ParameterError, match="noise.kind"):
        parse_config(bad)


def test_parse_validates_sweep_axis():
    cfg = _rates_config(sweep={"axis": "drive.theta", "start": 0.0,
                               "stop": 1.0, "count": 5})
    with pytest.raises(ParameterError, match="not a sweepable axis"):
        parse_config(cfg)
    cfg = _rates_config(sweep={"axis": "edsr.R", "start": 0.01,
                               "stop": 0.1, "count": 5})
    with pytest.raises(ParameterError, match="does not use"):
        parse_config(cfg)
    cfg = _rates_config(sweep={"axis": "drive.Omega", "start": 0.0,
                               "stop": 1.0, "count": 5, "spacing": "log"})
    with pytest.raises(ParameterError, match="positive endpoints"):
        parse_config(cfg)


def test_parse_rejects_model_level_problems_early():
    # the dry build must surface a degenerate starting point as a config error
    cfg = _rates_config()
    cfg["drive"]["Omega"] = 0.0
    with pytest.raises(ParameterError, match="degenerate"):
        parse_config(cfg)


def test_sha1_is_git_blob_style():
    import hashlib

    rc = parse_config(_rates_config())
    body = json.dumps(rc.to_dict(), sort_keys=True,
                      separators=(",", ":")).encode()
    ref = hashlib.sha1(b"blob %d\x00" % len(body) + body).hexdigest()
    assert config_sha1(rc) == ref


# ---------------------------------------------------------------------------
# running modes


def test_rates_sweep_csv(tmp_path, capsys):
    out = str(tmp_path / "nu_scan.csv")
    cfg = _rates_config(
        sweep={"axis": "drive.nu", "start": 0.8, "stop": 1.2, "count": 5},
        output={"path": out},
    )
    rc = parse_config(cfg)
    assert run(rc) == 0
    comments, cols, rows = _read_csv(out)
    assert comments[0] == "# dqe rates results"
    assert comments[1] == f"# config-sha1: {config_sha1(rc)}"
    assert cols == ["drive.nu", "inv_T1p", "inv_Tphip", "inv_T2p"]
    assert len(rows) == 5
    np.testing.assert_allclose(
        [float(r[0]) for r in rows], np.linspace(0.8, 1.2, 5)
    )
    for r in rows:
        assert float(r[3]) == pytest.approx(
            0.5 * float(r[1]) + float(r[2]), rel=1e-12
        )
    meta = json.loads((tmp_path / "nu_scan.meta.json").read_text())
    assert meta["config_sha1"] == config_sha1(rc)
    assert parse_config(meta["run_config"]) == rc
    assert "wrote" in capsys.readouterr().out


def test_single_point_solve_json(tmp_path):
    out = str(tmp_path / "solve.json")
    cfg = {
        "mode": "solve",
        "drive": {"omega_Z": 1.0, "Omega": 0.5, "nu": 1.0},
        "noise": {"kind": "white", "S0": 1.0, "W_x": 1e-3, "W_y": 1e-3,
                  "cutoff": 2.5},
        "output": {"path": out, "format": "json"},
    }
    rc = parse_config(cfg)
    assert run(rc) == 0
    doc = json.loads((tmp_path / "solve.json").read_text())
    assert doc["columns"] == ["inv_T1", "inv_T2", "inv_Tphi"]
    assert len(doc["rows"]) == 1
    # resonant lab T1 equals the dressed-frame T2 rate, here
    # 0.5 * (W_y * 2 S0) + 2 * W_x * S0 with W_x = W_y = 1e-3
    assert doc["rows"][0][0] == pytest.approx(3e-3, rel=1e-9)
    assert doc["metadata"]["config_sha1"] == config_sha1(rc)


def test_edsr_sweep_values(tmp_path):
    out = str(tmp_path / "edsr.csv")
    cfg = {
        "mode": "edsr",
        "edsr": {"op": "rates", "R": 0.05, "r": 0.5, "phi": 0.3},
        "sweep": {"axis": "edsr.delta", "start": -0.2, "stop": 0.2,
                  "count": 3},
        "output": {"path": out},
    }
    assert run(parse_config(cfg)) == 0
    _, cols, rows = _read_csv(out)
    assert cols == ["edsr.delta", "inv_T1p", "inv_Tphip", "inv_T2p"]
    from dqe.edsr import EdsrParams, edsr_rotating_rates

    for row in rows:
        ref = edsr_rotating_rates(
            EdsrParams(R=0.05, delta=float(row[0]), r=0.5, phi=0.3)
        )
        assert float(row[1]) == pytest.approx(ref.inv_T1p, rel=1e-12)


def test_oracle_mode_with_curves(tmp_path):
    out = str(tmp_path / "mc.csv")
    cfg = {
        "mode": "oracle",
        "drive": {"omega_Z": 1.0, "Omega": 0.0, "nu": 0.5},
        "noise": {"kind": "lorentzian", "Gamma": 0.05 * math.pi,
                  "gamma": 1.0, "W_z": 1.0, "cutoff": 10.0},
        "oracle": {"dt": 0.01, "t_max": 100.0, "n_traj": 150,
                   "initial_state": "x+", "curves": True,
                   "curve_stride": 100},
        "output": {"path": out},
        "seed": 3,
    }
    rc = parse_config(cfg)
    assert run(rc) == 0
    _, cols, rows = _read_csv(out)
    assert cols == ["rate", "stderr", "fit_kind"]
    assert len(rows) == 1
    assert float(rows[0][0]) == pytest.approx(0.05, rel=0.3)
    assert rows[0][2] == "crossing"
    _, ccols, crows = _read_csv(str(tmp_path / "mc_curves.csv"))
    assert ccols == ["t", "sx", "sy", "sz", "sx_err", "sy_err", "sz_err"]
    assert len(crows) == 101
    assert float(crows[0][1]) == pytest.approx(1.0, abs=1e-9)


def test_oracle_curves_incompatible_with_sweep(tmp_path):
    cfg = {
        "mode": "oracle",
        "drive": {"omega_Z": 1.0, "Omega": 0.0, "nu": 0.5},
        "noise": {"kind": "lorentzian", "Gamma": 0.05 * math.pi,
                  "gamma": 1.0, "W_z": 1.0, "cutoff": 10.0},
        "oracle": {"dt": 0.01, "t_max": 100.0, "n_traj": 150,
                   "initial_state": "x+", "curves": True},
        "sweep": {"axis": "noise.W_z", "start": 0.5, "stop": 1.0, "count": 2},
    }
    with pytest.raises(ParameterError, match="single-point"):
        parse_config(cfg)


def test_grid_failure_names_the_point(tmp_path, capsys):
    out = str(tmp_path / "split.csv")
    cfg = {
        "mode": "edsr",
        "edsr": {"op": "resonant_split", "R": 0.05},
        "sweep": {"axis": "edsr.delta", "start": 0.0, "stop": 0.1,
                  "count": 2},
        "output": {"path": out},
    }
    rc = parse_config(cfg)    # grid[0] is resonant, so the dry build passes
    assert run(rc) == 1
    err = capsys.readouterr().err
    assert "edsr.delta = 0.1" in err
    assert not os.path.exists(out)


def test_figure_preset(tmp_path, capsys):
    out = str(tmp_path / "fig3.csv")
    cfg = {"mode": "figure", "edsr": {"preset": "fig3"},
           "output": {"path": out}}
    rc = parse_config(cfg)
    assert run(rc) == 0
    comments, cols, rows = _read_csv(out)
    assert len(rows) == 81
    assert cols[0] == "edsr.phi"
    assert "total[r=0]" in cols and "sideband[r=0.9]" in cols
    png = tmp_path / "fig3.png"
    assert png.exists() and png.stat().st_size > 1000
    meta = json.loads((tmp_path / "fig3.meta.json").read_text())
    assert meta["preset"] == "fig3"
    assert meta["png"].endswith("fig3.png")
    # r = 0 drops the polarization angle entirely: flat curve
    col = cols.index("total[r=0]")
    vals = [float(r[col]) for r in rows]
    assert max(vals) - min(vals) < 1e-12


def test_figure_needs_known_preset():
    with pytest.raises(ParameterError, match="preset"):
        parse_config({"mode": "figure", "edsr": {"preset": "fig9"}})


def test_thread_count_does_not_change_bytes(tmp_path, monkeypatch):
    cfg = _rates_config(
        sweep={"axis": "drive.Omega", "start": 0.01, "stop": 0.5,
               "count": 17},
    )
    outputs = {}
    for n in ("1", "4"):
        workdir = tmp_path / f"threads_{n}"
        workdir.mkdir()
        monkeypatch.chdir(workdir)
        monkeypatch.setenv("DQE_THREADS", n)
        data = dict(cfg)
        data["output"] = {"path": "scan.csv"}
        assert run(parse_config(data)) == 0
        outputs[n] = (workdir / "scan.csv").read_bytes()
    assert outputs["1"] == outputs["4"]


def test_bad_thread_count(monkeypatch):
    monkeypatch.setenv("DQE_THREADS", "zero")
    with pytest.raises(SystemExit) as info:
        main(["rates"])
    assert info.value.code == 2


# ---------------------------------------------------------------------------
# argparse entry point


def test_main_end_to_end(tmp_path):
    cfg_path = _write_cfg(tmp_path, _rates_config())
    out = str(tmp_path / "out.csv")
    with pytest.raises(SystemExit) as info:
        main(["rates", "--config", cfg_path, "--out", out])
    assert info.value.code == 0
    assert os.path.exists(out)


def test_main_seed_override_changes_hash(tmp_path):
    cfg_path = _write_cfg(tmp_path, _rates_config())
    hashes = {}
    for seed in (0, 5):
        out = tmp_path / f"seed{seed}.csv"
        with pytest.raises(SystemExit) as info:
            main(["rates", "--config", cfg_path, "--out", str(out),
                  "--seed", str(seed)])
        assert info.value.code == 0
        sha_line = out.read_text().splitlines()[1]
        hashes[seed] = sha_line
    assert hashes[0] != hashes[5]


def test_main_mode_mismatch(tmp_path):
    cfg_path = _write_cfg(tmp_path, _rates_config())
    with pytest.raises(SystemExit) as info:
        main(["solve", "--config", cfg_path])
    assert info.value.code == 2


def test_main_missing_config_file(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["rates", "--config", str(tmp_path / "nope.json")])
    assert info.value.code == 2


def test_main_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(SystemExit) as info:
        main(["rates", "--config", str(path)])
    assert info.value.code == 2


def test_main_preset_requires_figure_mode(tmp_path):
    cfg_path = _write_cfg(tmp_path, _rates_config())
    with pytest.raises(SystemExit) as info:
        main(["rates", "--config", cfg_path, "--preset", "fig1"])
    assert info.value.code == 2


def test_main_figure_without_config(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        main(["figure", "--preset", "fig4"])
    assert info.value.code == 0
    assert (tmp_path / "fig4.csv").exists()
    assert (tmp_path / "fig4.png").exists()
    assert (tmp_path / "fig4.meta.json").exists()
