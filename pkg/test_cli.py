#!/usr/bin/env python3
"""
Tests for the command-line front end: exit codes and output files.
"""

import json
import shutil
from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError

from src.core.config import get_settings
from src.cli.main import EXIT_FAILURE, EXIT_IO, EXIT_OK, EXIT_USAGE, RunConfig, main

GOLDEN = Path(__file__).parent / "fixtures" / "golden"


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    data = tmp_path_factory.mktemp("data") / "synthetic"
    out = data.parent / "gen_out"
    code = main(["generate", "--data", str(data), "--num-images", "18", "--out", str(out), "--log-level", "WARNING"])
    assert code == EXIT_OK
    return data


def test_missing_variant_is_usage_error(tmp_path):
    assert main(["invariance", "--out", str(tmp_path)]) == EXIT_USAGE


def test_unparseable_factors_are_usage_error(tmp_path):
    assert main(["ecpe", "--factors", "one,two", "--out", str(tmp_path)]) == EXIT_USAGE


def test_ecpe_without_baseline_is_usage_error(tmp_path, dataset):
    code = main(["ecpe", "--factors", "2,3", "--data", str(dataset), "--out", str(tmp_path)])
    assert code == EXIT_USAGE
    assert not (tmp_path / "ecpe.json").exists()


def test_missing_manifest_is_io_error(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["ecpe", "--data", str(empty), "--out", str(tmp_path / "out")]) == EXIT_IO


def test_missing_corrupt_input_is_io_error(tmp_path):
    code = main(["corrupt", "--kind", "contrast", "--factors", "1", "--data", str(tmp_path / "nope.ppm"),
                 "--out", str(tmp_path / "out")])
    assert code == EXIT_IO


def test_corrupt_identity_is_byte_identical(tmp_path):
    source = tmp_path / "input.ppm"
    shutil.copy(GOLDEN / "input.ppm", source)
    out = tmp_path / "out"
    assert main(["corrupt", "--kind", "contrast", "--factors", "1,2", "--data", str(source), "--out", str(out)]) == EXIT_OK
    assert (out / "input_contrast_1.ppm").read_bytes() == source.read_bytes()
    assert (out / "input_contrast_2.ppm").read_bytes() == (GOLDEN / "contrast_2.ppm").read_bytes()
    summary = json.loads((out / "corrupt_summary.json").read_text())
    assert [e["factor"] for e in summary["entries"]] == [1.0, 2.0]
    assert (out / "run_config.yaml").exists()


def test_ecpe_output_is_reproducible(tmp_path, dataset):
    args = ["ecpe", "--variant", "both", "--factors", "1,2,3", "--data", str(dataset)]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "3"]) == EXIT_OK
    first = (tmp_path / "a" / "ecpe.json").read_bytes()
    assert first == (tmp_path / "b" / "ecpe.json").read_bytes()

    summary = json.loads(first)
    curves = {c["variant"]: c for c in summary["curves"]}
    assert curves["swin"]["relative_spread"] < 1e-6
    assert curves["vit"]["strictly_decreasing"]
    assert curves["vit"]["asymptotic_factor"] == 16.0
    assert curves["vit"]["asymptotic_ratio"] < 0.9
    assert len(summary["reports"]) == 6
    assert (tmp_path / "a" / "ecpe.svg").read_text().startswith("<svg")


def test_invariance_writes_reports(tmp_path):
    code = main(["invariance", "--variant", "both", "--trials", "5", "--gradient-configs", "1",
                 "--out", str(tmp_path)])
    assert code == EXIT_OK
    for variant in ("vit", "swin"):
        report = json.loads((tmp_path / f"invariance_{variant}.json").read_text())
        assert report["all_passed"]
        assert report["variant"] == variant


def test_invariance_failure_exit_code(tmp_path, monkeypatch):
    settings = get_settings()
    strict = settings.invariance.model_copy(update={"swin_gap_tol": 0.0, "trials": 3})
    monkeypatch.setattr(settings, "invariance", strict)
    assert main(["invariance", "--variant", "swin", "--gradient-configs", "1", "--out", str(tmp_path)]) == EXIT_FAILURE
    report = json.loads((tmp_path / "invariance_swin.json").read_text())
    assert not report["all_passed"]


def test_bench_writes_outputs(tmp_path):
    out = tmp_path / "out"
    code = main(["bench", "--variant", "swin", "--kinds", "contrast", "--num-images", "45",
                 "--data", str(tmp_path / "data"), "--out", str(out)])
    assert code == EXIT_OK
    bench = json.loads((out / "bench.json").read_text())
    assert bench["num_train"] + bench["num_val"] + bench["num_test"] == 45
    assert (out / "sweeps.csv").read_text().count("\n") == 1 + 3
    assert (out / "sweep_contrast.svg").exists()
    assert (out / "probes" / "swin_full.probe").exists()


def test_bench_rejects_factors_for_several_kinds(tmp_path):
    code = main(["bench", "--kinds", "contrast,gamma", "--factors", "1,2", "--num-images", "18",
                 "--data", str(tmp_path / "data"), "--out", str(tmp_path / "out")])
    assert code == EXIT_USAGE


def test_run_config_variants():
    assert [v.value for v in RunConfig(command="bench", variant="both").variants()] == ["vit", "swin"]
    with pytest.raises(ValidationError):
        RunConfig(command="ecpe", factors=[2.0, 3.0])


def test_ecpe_defaults_come_from_settings(tmp_path, dataset):
    assert main(["ecpe", "--factors", "1,2", "--data", str(dataset), "--out", str(tmp_path)]) == EXIT_OK
    run_config = yaml.safe_load((tmp_path / "run_config.yaml").read_text())
    settings = get_settings()
    assert run_config["workers"] == settings.ecpe.workers
    assert run_config["epsilon"] == settings.embedding.epsilon == 1e-5


def test_bench_rejects_dataset_from_other_seed(tmp_path):
    data = tmp_path / "data"
    common = ["bench", "--variant", "vit", "--kinds", "contrast", "--data", str(data)]
    assert main(common + ["--num-images", "27", "--seed", "7", "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(common + ["--num-images", "27", "--seed", "8", "--out", str(tmp_path / "b")]) == EXIT_USAGE
    assert main(common + ["--num-images", "18", "--seed", "7", "--out", str(tmp_path / "c")]) == EXIT_USAGE
    assert not (tmp_path / "b" / "bench.json").exists()
