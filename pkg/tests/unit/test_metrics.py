from __future__ import annotations

import numpy as np
import pytest

from mapdg.domains.evaluation.metrics import ShapeMismatchError, dice, mean_by, mean_dice
from mapdg.domains.evaluation.schemas import MetricRecord
from mapdg.domains.phantom.schemas import VesselMap


class TestDice:
    def test_perfect(self):
        mask = np.eye(5, dtype=np.uint8)

        assert dice(mask, mask) == 1.0

    def test_disjoint(self):
        assert dice(np.array([[1, 0]]), np.array([[0, 1]])) == 0.0

    def test_hand_value(self):
        pred = np.array([[1, 1, 0, 0]])
        truth = np.array([[0, 1, 1, 1]])

        assert dice(pred, truth) == pytest.approx(2 * 1 / 5)

    def test_both_empty(self):
        assert dice(np.zeros((3, 3)), np.zeros((3, 3))) == 1.0

    def test_accepts_vessel_map(self):
        pixels = np.zeros((4, 4), dtype=np.uint8)
        pixels[1, :] = 1

        assert dice(pixels, VesselMap(pixels=pixels, subject_id=0)) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dice(np.zeros((3, 3)), np.zeros((3, 4)))


def test_grouped_means():
    records = [
        MetricRecord(subject_id=1, domain="octa_like", shift_type="III", dice=0.2, threshold=0.5),
        MetricRecord(subject_id=2, domain="octa_like", shift_type="III", dice=0.4, threshold=0.5),
        MetricRecord(subject_id=1, domain="fundus_lesion", shift_type="I", dice=0.9, threshold=0.5),
    ]

    assert mean_by(records, lambda r: r.shift_type) == pytest.approx({"I": 0.9, "III": 0.3})
    assert mean_dice(records) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        mean_dice([])
