"""Command parsing, file output, determinism, exit codes."""

import json

import numpy as np
import pytest

from bohm_measure.cli import (
    ConfigError,
    MissingExperimentError,
    RunConfig,
    TypeMismatchError,
    UnknownKeyError,
    list_experiments,
    main,
    parse_config,
    read_config_file,
    read_table,
    write_table,
)
from bohm_measure.experiments import exp_coordinate

FAST = ["--samples", "40", "--t_end", "0.5"]


def manifest_of(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


# ------------------------------------------------------------ parsing


def test_parse_overrides_applied():
    cfg = parse_config(["run", "exp_born", "--samples", "10000",
                        "--seed", "42"])
    assert cfg.experiment == "exp_born"
    assert cfg.overrides == {"samples": 10000, "seed": 42}
    assert cfg.output_format == "csv"
    resolved = cfg.resolved()
    assert resolved["samples"] == 10000 and resolved["seed"] == 42


def test_parse_flag_beats_config_file(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("m = 1000\nsamples = 50   # small\n\n# comment\n")
    cfg = parse_config(["run", "exp_momentum_basic",
                        "--config", str(cfg_file), "--m", "1"])
    assert cfg.overrides["m"] == 1.0
    assert cfg.overrides["samples"] == 50


def test_parse_rejects_unknown_key():
    with pytest.raises(UnknownKeyError) as err:
        parse_config(["run", "exp_momentum_basic", "--lamda", "2"])
    assert "lambda" in str(err.value)


def test_parse_rejects_bad_type():
    with pytest.raises(TypeMismatchError) as err:
        parse_config(["run", "exp_born", "--samples", "many"])
    assert "int" in str(err.value)
    with pytest.raises(TypeMismatchError):
        parse_config(["run", "exp_born", "--samples", "10.5"])


def test_parse_rejects_missing_or_unknown_experiment():
    with pytest.raises(MissingExperimentError):
        parse_config(["run"])
    with pytest.raises(MissingExperimentError) as err:
        parse_config(["run", "exp_bron"])
    assert "exp_born" in str(err.value)


def test_config_file_syntax(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config_file(f)
    f.write_text("a = 1\nb = two words\n")
    assert read_config_file(f) == {"a": "1", "b": "two words"}


# ------------------------------------------------------------ tables


def test_table_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    columns = {
        "i": np.array([1, 2, 3], dtype=np.int64),
        "x": np.array([0.1, -1.0 / 3.0, 1e-300]),
        "s": np.array(["a", "b", "c"]),
    }
    write_table(path, columns, ",")
    back = read_table(path)
    assert np.array_equal(back["i"], columns["i"])
    assert np.array_equal(back["x"], columns["x"])   # 17 digits: exact
    assert list(back["s"]) == ["a", "b", "c"]


def test_table_rejects_ragged(tmp_path):
    with pytest.raises(ValueError):
        write_table(tmp_path / "bad.csv",
                    {"a": np.arange(3), "b": np.arange(2)}, ",")


def test_emitted_table_matches_memory(tmp_path):
    out = tmp_path / "run"
    code = main(["run", "exp_coordinate", "--samples", "25",
                 "--seed", "4", "--out", str(out)])
    assert code == 0
    disk = read_table(out / "readout.csv")
    result = exp_coordinate(samples=25, seed=4)
    for col in ("q0", "r0", "r_final", "readout", "abs_error"):
        assert np.array_equal(disk[col], result.series["readout"][col])


# ------------------------------------------------------------ runs


def test_run_writes_expected_files(tmp_path):
    out = tmp_path / "out"
    code = main(["run", "exp_momentum_basic", *FAST, "--out", str(out)])
    assert (out / "manifest.json").exists()
    assert (out / "trajectories.csv").exists()
    assert (out / "outcomes.csv").exists()
    assert (out / "checks.csv").exists()
    manifest = manifest_of(out)
    assert manifest["experiment"] == "exp_momentum_basic"
    assert manifest["parameters"]["samples"] == 40
    assert sorted(manifest["files"]) == manifest["files"]
    # short run cannot resolve: scientific failure, not config failure
    assert code == 1


def test_run_byte_identical(tmp_path):
    outs = []
    for name in ("one", "two"):
        out = tmp_path / name
        assert main(["run", "exp_momentum_basic", "--samples", "60",
                     "--seed", "7", "--t_end", "2.0", "--out", str(out)]) in (0, 1)
        outs.append(out)
    a, b = outs
    for f in sorted(p.name for p in a.iterdir()):
        if f == "manifest.json":
            continue
        assert (a / f).read_bytes() == (b / f).read_bytes(), f
    drop = ("created_utc", "wall_time_s")
    ma = {k: v for k, v in manifest_of(a).items() if k not in drop}
    mb = {k: v for k, v in manifest_of(b).items() if k not in drop}
    assert ma == mb


def test_run_tsv_format(tmp_path):
    out = tmp_path / "tsv"
    main(["run", "exp_momentum_basic", *FAST, "--format", "tsv",
          "--out", str(out)])
    header = (out / "outcomes.tsv").read_text().splitlines()[0]
    assert "\t" in header and "," not in header


def test_exit_codes(tmp_path, capsys):
    assert main(["run", "exp_coordinate", "--T", "300",
                 "--out", str(tmp_path / "a")]) == 2
    assert "validity report" in capsys.readouterr().err
    assert main(["run", "exp_momentum_basic", "--lamda", "2"]) == 2
    assert main(["run", "exp_nope"]) == 2
    assert main(["run"]) == 2
    assert main([]) == 2
    capsys.readouterr()
    out = tmp_path / "ok"
    assert main(["run", "exp_coordinate", "--samples", "20",
                 "--out", str(out)]) == 0


def test_list_stable_catalog(capsys):
    assert main(["list"]) == 0
    first = capsys.readouterr().out
    assert main(["list"]) == 0
    second = capsys.readouterr().out
    assert first == second
    born_line = next(l for l in first.splitlines() if "exp_born" in l)
    assert "Fig. 2" in born_line
    seq_line = next(l for l in first.splitlines()
                    if "exp_sequential_uncertainty" in l)
    assert "Figs. 4-6" in seq_line
    assert list_experiments() in first


def test_runconfig_resolved_defaults():
    cfg = RunConfig(experiment="exp_born", overrides={"samples": 9},
                    seed=3)
    resolved = cfg.resolved()
    assert resolved["samples"] == 9
    assert resolved["seed"] == 3
    assert resolved["bundle"] == 200
