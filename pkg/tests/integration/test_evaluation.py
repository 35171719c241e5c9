"""Scoring on held-out styles, method comparison and ablation bookkeeping."""

from __future__ import annotations

import pytest

from mapdg.domains.evaluation.ablation import (
    ABLATION_ROWS,
    InvalidAblationError,
    format_ablation_table,
    run_ablation,
    validate_flags,
)
from mapdg.domains.evaluation.repository import EvaluationRepository
from mapdg.domains.evaluation.schemas import AblationCell, AblationConfig, AblationFlags, MetricRecord
from mapdg.domains.evaluation.service import (
    EmptySplitError,
    best_threshold,
    compare,
    evaluate,
    evaluate_oracles,
    format_comparison,
    predict_masks,
    vessel_probabilities,
)
from mapdg.domains.pseudomod.service import source_input
from mapdg.domains.segnet.service import build_segnet


@pytest.fixture(scope="module")
def untrained():
    return build_segnet(0).eval()


class TestEvaluate:
    def test_one_record_per_subject_and_style(self, small_split, untrained):
        records = evaluate(untrained, small_split.test)

        assert len(records) == len(small_split.test)
        assert records == sorted(records, key=lambda r: (r.subject_id, r.domain))
        assert {r.shift_type for r in records} == {"I", "II", "III"}
        assert all(0.0 <= r.dice <= 1.0 for r in records)

    def test_restores_training_mode(self, small_split):
        net = build_segnet(0).train()

        vessel_probabilities(net, [source_input(small_split.test[0])])

        assert net.training

    def test_masks_are_binary(self, small_split, untrained):
        masks = predict_masks(untrained, [source_input(item) for item in small_split.test[:2]], 0.5)

        for mask, item in zip(masks, small_split.test):
            assert mask.shape == item.vessel_map.shape
            assert set(mask.ravel().tolist()) <= {0, 1}

    def test_extreme_thresholds(self, small_split, untrained):
        items = small_split.test[:1]
        everything = predict_masks(untrained, [source_input(items[0])], 0.0)[0]

        assert everything.all()
        threshold, score = best_threshold(untrained, items, [0.0, 0.5, 1.01])
        assert threshold in (0.0, 0.5, 1.01)
        assert 0.0 <= score <= 1.0

    def test_empty(self, untrained):
        with pytest.raises(EmptySplitError):
            evaluate(untrained, [])

    def test_oracle_scored_on_own_style_only(self, small_split, untrained):
        records = evaluate_oracles({"octa_like": untrained}, small_split.test)

        assert {r.domain for r in records} == {"octa_like"}
        assert len(records) == len(small_split.test_subjects)


class TestCompare:
    def test_rows_per_method_and_style(self, tmp_path):
        records = {
            "baseline": [
                MetricRecord(subject_id=1, domain="octa_like", shift_type="III", dice=0.1, threshold=0.5),
                MetricRecord(subject_id=2, domain="octa_like", shift_type="III", dice=0.3, threshold=0.5),
            ],
            "map": [MetricRecord(subject_id=1, domain="octa_like", shift_type="III", dice=0.6, threshold=0.5)],
        }

        rows = compare(records)

        assert [(r.method, r.domain, r.subjects) for r in rows] == [("baseline", "octa_like", 2), ("map", "octa_like", 1)]
        assert rows[0].mean_dice == pytest.approx(0.2)
        table = format_comparison(rows)
        assert "octa_like" in table and "60.00" in table

        path = EvaluationRepository(tmp_path).write_comparison(rows)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "method,domain,shift_type,mean_dice,subjects"
        assert (tmp_path / "comparison.txt").exists()


class TestAblationBookkeeping:
    def test_six_valid_rows(self):
        assert len(ABLATION_ROWS) == 6
        assert len({row.label for row in ABLATION_ROWS}) == 6
        for row in ABLATION_ROWS:
            validate_flags(row)

    def test_sim_without_episodic_is_invalid(self):
        with pytest.raises(InvalidAblationError):
            validate_flags(AblationFlags(episodic=False, use_sim=True, use_ncc=False))

    def test_table_and_csv(self, tmp_path):
        cells = [
            AblationCell(
                flags=ABLATION_ROWS[0],
                per_shift={"I": 0.5, "II": 0.25, "III": 0.0},
                overall=0.25,
                per_seed=[0.25],
            ),
            AblationCell(
                flags=ABLATION_ROWS[-1],
                per_shift={"I": 0.75, "II": 0.5, "III": 0.25},
                overall=0.5,
                per_seed=[0.5],
            ),
        ]

        table = format_ablation_table(cells)
        path = EvaluationRepository(tmp_path).write_ablation(cells)

        assert "Type I" in table and "Type III" in table
        assert "50.00" in table
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "episodic,use_sim,use_ncc,type_I,type_II,type_III,overall,per_seed"
        assert lines[2].startswith("1,1,1,0.75,0.5,0.25,0.5")

    def test_single_cell_end_to_end(self, small_split, tiny_bank, tiny_episode):
        cells = run_ablation(
            tiny_bank,
            small_split.test,
            tiny_episode,
            AblationConfig(seeds=(0,), epochs=1),
            rows=[ABLATION_ROWS[-1]],
        )

        assert len(cells) == 1
        cell = cells[0]
        assert set(cell.per_shift) == {"I", "II", "III"}
        assert cell.overall == pytest.approx(sum(cell.per_shift.values()) / 3)
        assert len(cell.per_seed) == 1

    def test_invalid_rows_rejected_before_training(self, small_split, tiny_bank, tiny_episode):
        with pytest.raises(InvalidAblationError):
            run_ablation(
                tiny_bank,
                small_split.test,
                tiny_episode,
                rows=[ABLATION_ROWS[0], AblationFlags(episodic=False, use_sim=True, use_ncc=True)],
            )
