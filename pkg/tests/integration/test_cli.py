"""The command-line pipeline on the smoke configuration."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mapdg.cli.app import EXIT_OK, EXIT_USAGE, main
from mapdg.cli.manifest import RunManifest, RunStatus
from mapdg.domains.meta_trainer.repository import read_rows
from mapdg.domains.mixup.repository import read_lambdas

SMOKE = Path(__file__).resolve().parents[2] / "configs" / "smoke.toml"


def _run(out: Path, *argv: str) -> int:
    return main([*argv, "--config", str(SMOKE), "--out", str(out)])


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("runs")
    assert _run(out, "gen-data") == EXIT_OK
    assert _run(out, "train-pseudo") == EXIT_OK
    return out


class TestPipeline:
    def test_gen_data_outputs(self, pipeline):
        manifest = RunManifest.read(pipeline / "data")

        assert manifest.status is RunStatus.SUCCEEDED
        assert manifest.command == "gen-data"
        assert (pipeline / "data" / "manifest.csv").exists()
        assert (pipeline / "data" / "run.log.jsonl").exists()

    def test_bank_written(self, pipeline):
        pseudo = pipeline / "pseudo"

        assert sorted(p.name for p in (pseudo / "synthesis").glob("*.pt")) == ["seed1.pt", "seed2.pt", "seed3.pt"]
        assert len(list((pseudo / "bank" / "d2").glob("*.png"))) == 4
        assert str(pipeline / "data") in RunManifest.read(pseudo).inputs

    def test_meta_train_then_eval(self, pipeline):
        assert _run(pipeline, "meta-train") == EXIT_OK
        assert _run(pipeline, "eval", "--set", "evaluation.oracle=false") == EXIT_OK

        steps = read_rows(pipeline / "meta" / "steps.csv")
        assert len(steps) == 2
        metrics = read_rows(pipeline / "eval" / "metrics_map.csv")
        assert len(metrics) == 2 * 3
        assert (pipeline / "eval" / "comparison.txt").exists()

    def test_dump_mixup_lambda_means(self, pipeline):
        code = _run(pipeline, "dump-mixup", "--alpha", "5,5,5", "--alpha", "1.5,5,1.5")

        assert code == EXIT_OK
        symmetric = read_lambdas(pipeline / "mixup" / "alpha_5_5_5" / "draws.csv")
        skewed = read_lambdas(pipeline / "mixup" / "alpha_1.5_5_1.5" / "draws.csv")
        assert symmetric.shape == (500, 3)
        np.testing.assert_allclose(symmetric.mean(axis=0), [1 / 3] * 3, atol=0.03)
        np.testing.assert_allclose(skewed.mean(axis=0), [0.1875, 0.625, 0.1875], atol=0.03)
        samples = read_lambdas(pipeline / "mixup" / "alpha_5_5_5" / "lambdas.csv")
        assert samples.shape == (4, 3)
        assert (pipeline / "mixup" / "alpha_5_5_5" / "grid.png").exists()


class TestFailures:
    def test_unknown_command(self, tmp_path):
        assert main(["no-such-command", "--out", str(tmp_path)]) != EXIT_OK

    def test_bad_override_is_a_usage_error(self, tmp_path):
        assert main(["gen-data", "--out", str(tmp_path), "--set", "data.nope=1"]) == EXIT_USAGE

    def test_missing_inputs_fail_and_are_recorded(self, tmp_path):
        code = main(["meta-train", "--out", str(tmp_path)])

        assert code not in (EXIT_OK, EXIT_USAGE)
        manifest = RunManifest.read(tmp_path / "meta")
        assert manifest.status is RunStatus.FAILED
        assert manifest.error

    def test_unknown_family_fails(self, tmp_path):
        code = main(["gen-data", "--out", str(tmp_path), "--set", 'data.target_families=["nope"]'])

        assert code != EXIT_OK
        assert RunManifest.read(tmp_path / "data").status is RunStatus.FAILED
