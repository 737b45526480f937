import json
from pathlib import Path

import numpy as np

from dynsamp import (
    evolve,
    lattice_mask,
    observe,
    random_tensor,
    read_t3,
    save_sample_data,
    write_t3,
)
from dynsamp.cli import main


def dir_bytes(path: Path) -> dict:
    return {f.name: f.read_bytes() for f in sorted(path.iterdir()) if f.is_file()}


SMALL = ["--m", "6", "--p", "4", "--n", "2", "--seed", "3"]


def test_simulate_writes_expected_files(tmp_path):
    out = tmp_path / "ds"
    code = main(["simulate", "--out", str(out), "--T", "3", "--alpha", "0.5"] + SMALL)
    assert code == 0
    names = {f.name for f in out.iterdir()}
    assert names == {
        "A.t3", "F.t3", "mask.t3", "mask.t3.json", "meta.json", "manifest.json",
        "obs_0.t3", "obs_1.t3", "obs_2.t3",
    }
    meta = json.loads((out / "meta.json").read_text())
    assert meta["T"] == 3 and meta["dims"] == [6, 4, 2]


def test_simulate_horizon_one(tmp_path):
    out = tmp_path / "ds"
    assert main(["simulate", "--out", str(out), "--T", "1"] + SMALL) == 0
    obs = [f for f in out.iterdir() if f.name.startswith("obs_")]
    assert len(obs) == 1


def test_simulate_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    argv = ["simulate", "--T", "3", "--alpha", "0.4"] + SMALL
    assert main(argv + ["--out", str(a)]) == 0
    assert main(argv + ["--out", str(b)]) == 0
    assert dir_bytes(a) == dir_bytes(b)


def test_simulate_respects_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 5, "p": 3, "n": 2, "T": 2, "alpha": 0.7, "seed": 4}))
    out = tmp_path / "ds"
    assert main(["simulate", "--config", str(cfg), "--out", str(out), "--T", "4"]) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["T"] == 4  # flag wins
    assert meta["dims"] == [5, 3, 2]


def test_simulate_rejects_unknown_config_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 3}))
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert code == 3
    assert "trials" in capsys.readouterr().err


def test_simulate_rejects_bad_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert code == 3
    err = capsys.readouterr().err
    assert "line 1" in err


def test_simulate_requires_out(capsys):
    assert main(["simulate"]) == 3


def test_reconstruct_round_trip(tmp_path, capsys):
    out = tmp_path / "ds"
    main(["simulate", "--out", str(out), "--T", "4", "--alpha", "0.6"] + SMALL)
    code = main(["reconstruct", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["rel_error"] <= 1e-9
    assert report["failed_columns"] == []
    assert set(report) == {
        "rel_error", "residuals", "kappa", "K", "ranks", "failed_columns",
    }
    estimate = read_t3(out / "estimate.t3")
    truth = read_t3(out / "F.t3")
    assert np.allclose(estimate.data, truth.data, atol=1e-8)
    assert "relative error" in capsys.readouterr().out


def test_reconstruct_paper_dims_accuracy(tmp_path):
    out = tmp_path / "ds"
    main(["simulate", "--out", str(out), "--seed", "1"])  # defaults: 20x15x5, T=5, alpha=0.4
    assert main(["reconstruct", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["rel_error"] <= 1e-9


def test_reconstruct_missing_dataset(tmp_path, capsys):
    assert main(["reconstruct", str(tmp_path / "nope")]) == 4
    assert "error:" in capsys.readouterr().err


def test_reconstruct_partial_dataset(tmp_path, capsys):
    out = tmp_path / "ds"
    main(["simulate", "--out", str(out), "--T", "2"] + SMALL)
    (out / "obs_1.t3").unlink()
    assert main(["reconstruct", str(out)]) == 4


def test_reconstruct_unrecoverable_exit_code(tmp_path, capsys):
    m, p, n, T = 5, 4, 2, 3
    a = random_tensor(m, m, n, 31)
    f = random_tensor(m, p, n, 32)
    mask = lattice_mask(m, p, n, range(m), [0, 2])  # columns 1, 3 unsampled
    samples = observe(evolve(a, f, T), mask, 0.0, 33)
    ds = tmp_path / "ds"
    save_sample_data(ds, samples)
    write_t3(ds / "A.t3", a)
    write_t3(ds / "F.t3", f)

    code = main(["reconstruct", str(ds)])
    assert code == 2
    assert "column(s) 1, 3" in capsys.readouterr().err
    assert not (ds / "estimate.t3").exists()

    code = main(["reconstruct", str(ds), "--allow-partial", "--out", str(tmp_path / "o")])
    assert code == 2  # still signals the failure, but writes the partial outputs
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["failed_columns"] == [1, 3]
    assert (tmp_path / "o" / "estimate.t3").exists()


def test_experiment_requires_kind(capsys):
    assert main(["experiment", "--out", "/tmp/x"]) == 3


def test_experiment_full_alpha_grid_point(tmp_path):
    out = tmp_path / "exp"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "kind": "recovery-vs-alpha",
                "m": 6, "p": 4, "n": 2,
                "alpha": [1.0], "T": 3, "trials": 2, "seed": 3,
            }
        )
    )
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    rows = (out / "recovery-vs-alpha.csv").read_text().splitlines()
    assert rows[0] == "alpha,mean_rel_err,std_rel_err"
    assert float(rows[1].split(",")[1]) <= 1e-10


def test_experiment_thread_env_determinism(tmp_path, monkeypatch):
    argv = [
        "experiment", "--kind", "slab-dim1-dim3",
        "--m", "6", "--p", "4", "--n", "2", "--T", "3", "--alpha", "0.8",
        "--seed", "3",
    ]
    monkeypatch.setenv("DYNSAMP_THREADS", "1")
    assert main(argv + ["--out", str(tmp_path / "t1")]) == 0
    monkeypatch.setenv("DYNSAMP_THREADS", "8")
    assert main(argv + ["--out", str(tmp_path / "t8")]) == 0
    assert dir_bytes(tmp_path / "t1") == dir_bytes(tmp_path / "t8")


def test_unknown_flag_is_config_error(capsys):
    assert main(["experiment", "--bogus", "1"]) == 3
