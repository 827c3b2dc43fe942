import json

import pytest

from passlab.cli import main

AFFINE_DEFORM = {
    "functional": {"catalog": "affine"},
    "deformation": {"c": 0.0, "eps": 0.5, "backend": "exact_affine",
                    "samples": 200},
    "seed": 0,
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _run(tmp_path, sub, cfg, *flags):
    out = tmp_path / "out"
    code = main([sub, "--config", _write(tmp_path, cfg), "--out", str(out),
                 *flags])
    report = None
    rp = out / "report.json"
    if rp.exists():
        report = json.loads(rp.read_text())
    return code, report, out


def test_deform_affine(tmp_path):
    code, report, out = _run(tmp_path, "deform", AFFINE_DEFORM)
    assert code == 0
    result = report["payload"]["result"]
    assert result["a_prime_violations"] == 0
    assert result["hypothesis_min_grad"] == 1.0
    assert all(c["ok"] for c in report["payload"]["checks"])
    assert (out / "psi_grid.csv").exists()
    assert report["config"] == AFFINE_DEFORM
    assert "wall_ms" in report and "version" in report


def test_minimax_with_oracle(tmp_path):
    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "minimax": {"pin_zero": [0.0, 0.0], "pin_e": [1.0, 0.0],
                    "ensemble_size": 4, "M": 16, "max_iters": 150,
                    "conclusions_eps": 0.05},
        "oracle": {"resolution": 129},
        "seed": 0,
    }
    code, report, out = _run(tmp_path, "minimax", cfg)
    assert code == 0
    result = report["payload"]["result"]
    assert abs(result["c2"]["value"] - result["oracle"]["bottleneck"]) <= 0.03
    assert all(result["conclusions"][k]["holds"]
               for k in ("I", "II", "III", "IV"))
    assert (out / "witness_c1.csv").exists()
    assert (out / "witness_c2.csv").exists()


def test_oracle_subcommand(tmp_path):
    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "oracle": {"resolution": 65, "p": [0.0, 0.0], "q": [1.0, 0.0],
                   "scan_resolution": 101, "grad_tol": 0.05},
    }
    code, report, _ = _run(tmp_path, "oracle", cfg)
    assert code == 0
    result = report["payload"]["result"]
    assert result["bottleneck"]["value"] == pytest.approx(1.0, abs=0.1)
    assert all(c["ok"] for c in report["payload"]["checks"])


def test_pscheck_and_geometry(tmp_path):
    cfg = {
        "functional": {"catalog": "paraboloid"},
        "ps": {"level": 1.0, "band_halfwidth": 0.1, "samples": 32},
    }
    code, report, _ = _run(tmp_path, "pscheck", cfg)
    assert code == 0
    assert report["payload"]["result"]["verdict"] == "Vacuous"

    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "minimax": {"pin_zero": [0.0, 0.0], "pin_e": [2.0, 0.0]},
        "geometry": {"r": 1.0, "sphere_samples": 512},
    }
    code, report, _ = _run(tmp_path, "geometry", cfg)
    assert code == 0
    assert report["payload"]["result"]["verdict"] is True


def test_proof_trace_subcommand(tmp_path):
    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "minimax": {"pin_zero": [0.0, 0.0], "pin_e": [1.0, 0.0]},
        "proof_trace": {"c1": 0.0, "c2": 1.0, "eps": 0.3},
    }
    code, report, _ = _run(tmp_path, "proof-trace", cfg)
    assert code == 0
    assert report["payload"]["result"]["eps1"] == 0.25
    assert report["payload"]["checks"][0]["ok"]


def test_invalid_eps_exits_2(tmp_path):
    cfg = dict(AFFINE_DEFORM, deformation={"c": 0.0, "eps": -1.0})
    code, _, _ = _run(tmp_path, "deform", cfg)
    assert code == 2


def test_bad_json_exits_2(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["deform", "--config", str(p),
                 "--out", str(tmp_path / "o")]) == 2


def test_missing_config_exits_2(tmp_path):
    assert main(["deform", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "o")]) == 2


def test_unknown_catalog_exits_2(tmp_path):
    cfg = dict(AFFINE_DEFORM, functional={"catalog": "mystery"})
    code, _, _ = _run(tmp_path, "deform", cfg)
    assert code == 2


def test_strict_mode_failure_exits_3(tmp_path):
    # a deliberately coarse oracle grid disagrees with the optimizer by
    # more than the 0.03 proximity check allows
    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "minimax": {"pin_zero": [0.0, 0.0], "pin_e": [1.0, 0.0],
                    "ensemble_size": 2, "M": 16, "max_iters": 100},
        "oracle": {"resolution": 6},
        "seed": 0,
    }
    code, report, _ = _run(tmp_path, "minimax", cfg, "--strict")
    assert code == 3
    assert report is not None  # the report is still written


def test_seed_override(tmp_path):
    cfg = {
        "functional": {"catalog": "paraboloid"},
        "ps": {"level": 1.0, "band_halfwidth": 0.1, "samples": 16},
        "seed": 0,
    }
    code, report, _ = _run(tmp_path, "pscheck", cfg, "--seed", "7")
    assert code == 0
    assert report["payload"]["seed"] == 7


def test_reproducible_payload(tmp_path):
    cfg = {
        "functional": {"catalog": "well_to_saddle"},
        "ps": {"level": 1.0, "band_halfwidth": 0.05, "samples": 32},
        "seed": 3,
    }
    runs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert main(["pscheck", "--config", _write(tmp_path, cfg),
                     "--out", str(out)]) == 0
        runs.append(json.dumps(
            json.loads((out / "report.json").read_text())["payload"],
            sort_keys=True))
    assert runs[0] == runs[1]
