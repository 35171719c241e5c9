"""Segmentation, similarity and correlation losses."""

from __future__ import annotations

import math

import pytest
import torch

from mapdg.domains.losses.functional import (
    DimensionMismatchError,
    NonFiniteLossError,
    ZeroNormFeatureError,
    meta_test_loss,
    ncc_loss,
    ncc_matrix,
    seg_loss,
    seg_loss_components,
    sim_loss,
    sim_loss_batch,
)
from mapdg.domains.losses.schemas import LossWeights
from mapdg.domains.segnet.schemas import FeatureBatch


def _batch(vectors, subjects, anchors=None, indices=None) -> FeatureBatch:
    n = len(subjects)
    return FeatureBatch(
        vectors=torch.as_tensor(vectors, dtype=torch.float64),
        subject_ids=tuple(subjects),
        anchor_flags=tuple(anchors) if anchors is not None else (False,) * n,
        sample_index=tuple(indices) if indices is not None else tuple(range(n)),
    )


def _random_batch(seed: int, n: int = 6, dim: int = 8) -> FeatureBatch:
    generator = torch.Generator().manual_seed(seed)
    vectors = torch.randn(n, dim, generator=generator, dtype=torch.float64)
    subjects = torch.randint(0, 3, (n,), generator=generator).tolist()
    return _batch(vectors, subjects)


class TestSegLoss:
    def test_confident_correct_prediction_is_near_zero(self):
        target = torch.zeros(1, 8, 8, dtype=torch.long)
        target[0, 2:5, 2:5] = 1
        logits = torch.stack([(1 - target) * 20.0, target * 20.0], dim=1).float()

        assert float(seg_loss(logits, target)) < 1e-3

    def test_wrong_prediction_is_large(self):
        target = torch.zeros(1, 8, 8, dtype=torch.long)
        target[0, 2:5, 2:5] = 1
        logits = torch.stack([target * 20.0, (1 - target) * 20.0], dim=1).float()

        ce, dice = seg_loss_components(logits, target)

        assert float(ce) > 10.0
        assert float(dice) == pytest.approx(1.0, abs=1e-4)

    def test_accepts_unbatched_target(self):
        logits = torch.zeros(1, 2, 4, 4)

        value = seg_loss(logits, torch.ones(4, 4, dtype=torch.long))

        assert float(value) == pytest.approx(math.log(2.0) + 1.0 / 3.0, abs=1e-5)

    def test_misaligned(self):
        with pytest.raises(ValueError):
            seg_loss(torch.zeros(2, 2, 4, 4), torch.zeros(1, 4, 4, dtype=torch.long))

    def test_non_finite_logits(self):
        logits = torch.zeros(1, 2, 4, 4)
        logits[0, 0, 0, 0] = float("inf")

        with pytest.raises(NonFiniteLossError):
            seg_loss(logits, torch.zeros(1, 4, 4, dtype=torch.long))

    @pytest.mark.parametrize("seed", range(50))
    def test_gradcheck(self, seed):
        generator = torch.Generator().manual_seed(seed)
        logits = torch.randn(2, 2, 4, 4, generator=generator, dtype=torch.float64, requires_grad=True)
        target = torch.randint(0, 2, (2, 4, 4), generator=generator)

        assert torch.autograd.gradcheck(lambda x: seg_loss(x, target), (logits,), rtol=1e-3)


class TestSimLoss:
    def test_hand_value(self):
        anchor = torch.tensor([1.0, 0.0, -1.0])
        samples = torch.tensor([[1.0, 1.0, -1.0], [0.0, 0.0, 0.0]])

        assert float(sim_loss(anchor, samples)) == pytest.approx(1.0 + 2.0)

    def test_zero_when_samples_equal_anchor(self):
        anchor = torch.randn(32)

        assert float(sim_loss(anchor, [anchor.clone(), anchor.clone()])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            sim_loss(torch.zeros(4), torch.zeros(2, 3))

    def test_batch_skips_anchor_rows(self):
        batch = _batch(
            [[1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [0.0, 3.0]],
            subjects=[1, 1, 2, 2],
            anchors=[True, False, False, False],
        )
        anchors = {1: torch.tensor([1.0, 0.0], dtype=torch.float64), 2: torch.tensor([0.0, 1.0], dtype=torch.float64)}

        assert float(sim_loss_batch(anchors, batch)) == pytest.approx(1.0 + 0.0 + 2.0)

    @pytest.mark.parametrize("seed", range(50))
    def test_gradcheck(self, seed):
        generator = torch.Generator().manual_seed(seed)
        anchor = torch.randn(8, generator=generator, dtype=torch.float64)
        samples = torch.randn(3, 8, generator=generator, dtype=torch.float64, requires_grad=True)

        assert torch.autograd.gradcheck(lambda s: sim_loss(anchor, s), (samples,), rtol=1e-3)


class TestNccLoss:
    def test_orthogonal_same_subject_pair_costs_two(self):
        matrix = ncc_matrix(_batch([[1.0, 0.0], [0.0, 1.0]], subjects=[7, 7]))

        assert float(ncc_loss(matrix)) == pytest.approx(2.0)

    def test_orthogonal_distinct_subjects_cost_nothing(self):
        matrix = ncc_matrix(_batch([[1.0, 0.0], [0.0, 1.0]], subjects=[1, 2]))

        assert float(ncc_loss(matrix)) == pytest.approx(0.0, abs=1e-12)

    def test_target_and_row_order(self):
        batch = _batch(
            [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
            subjects=[2, 1, 1],
            anchors=[False, False, True],
            indices=[0, 0, -1],
        )

        matrix = ncc_matrix(batch)

        assert matrix.subject_ids == (1, 1, 2)
        assert matrix.anchor_flags == (True, False, False)
        torch.testing.assert_close(
            matrix.c_star,
            torch.tensor([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]], dtype=torch.float64),
        )
        torch.testing.assert_close(torch.diagonal(matrix.c), torch.ones(3, dtype=torch.float64))
        torch.testing.assert_close(matrix.c, matrix.c.T)

    @pytest.mark.parametrize("seed", range(50))
    def test_correlation_matrix_algebra(self, seed):
        c = ncc_matrix(_random_batch(seed)).c

        torch.testing.assert_close(c, c.T, rtol=0, atol=1e-6)
        torch.testing.assert_close(torch.diagonal(c), torch.ones(len(c), dtype=torch.float64), rtol=0, atol=1e-6)
        assert bool((c >= -1.0).all()) and bool((c <= 1.0).all())

    @pytest.mark.parametrize("scale", [1e-3, 0.5, 3.5, 1e4])
    def test_scale_invariant(self, scale):
        batch = _random_batch(7)
        scaled = _batch(batch.vectors * scale, batch.subject_ids)

        a = ncc_loss(ncc_matrix(batch))
        b = ncc_loss(ncc_matrix(scaled))

        torch.testing.assert_close(a, b, rtol=0, atol=1e-9)

    def test_zero_exactly_at_target(self):
        clustered = _batch([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 3.0, 0.0]], [0, 0, 1, 1])
        perturbed = _batch([[1.0, 0.0, 0.0], [2.0, 0.1, 0.0], [0.0, 0.5, 0.0], [0.0, 3.0, 0.0]], [0, 0, 1, 1])

        matrix = ncc_matrix(clustered)
        assert torch.equal(matrix.c, matrix.c_star)
        assert float(ncc_loss(matrix)) == 0.0

        matrix = ncc_matrix(perturbed)
        assert not torch.equal(matrix.c, matrix.c_star)
        assert float(ncc_loss(matrix)) > 0.0

    @pytest.mark.parametrize("seed", range(10))
    def test_row_order_does_not_matter(self, seed):
        batch = _random_batch(seed)
        order = torch.randperm(len(batch), generator=torch.Generator().manual_seed(seed)).tolist()
        shuffled = _batch(
            batch.vectors[order],
            [batch.subject_ids[i] for i in order],
            indices=[batch.sample_index[i] for i in order],
        )

        a, b = ncc_matrix(batch), ncc_matrix(shuffled)

        assert a.subject_ids == b.subject_ids
        torch.testing.assert_close(a.c, b.c)
        torch.testing.assert_close(ncc_loss(a), ncc_loss(b))

    @pytest.mark.parametrize("seed", range(20))
    def test_pulling_subject_together_lowers_loss(self, seed):
        # subjects occupy orthogonal coordinate blocks, so cross-subject cosines stay zero
        generator = torch.Generator().manual_seed(seed)
        vectors = torch.zeros(4, 8, dtype=torch.float64)
        vectors[:2, :4] = torch.rand(2, 4, generator=generator, dtype=torch.float64) + 0.1
        vectors[2:, 4:] = torch.rand(2, 4, generator=generator, dtype=torch.float64) + 0.1
        subjects = [0, 0, 1, 1]
        mean = vectors[:2].mean(dim=0)
        pulled = vectors.clone()
        pulled[:2] = 0.5 * vectors[:2] + 0.5 * mean

        before = ncc_loss(ncc_matrix(_batch(vectors, subjects)))
        after = ncc_loss(ncc_matrix(_batch(pulled, subjects)))

        assert float(after) < float(before)

    def test_zero_vector(self):
        with pytest.raises(ZeroNormFeatureError) as exc_info:
            ncc_matrix(_batch([[1.0, 0.0], [0.0, 0.0]], subjects=[0, 1]))
        assert exc_info.value.index == 1

    @pytest.mark.parametrize("seed", range(50))
    def test_gradcheck(self, seed):
        vectors = torch.randn(
            4, 8, generator=torch.Generator().manual_seed(seed), dtype=torch.float64, requires_grad=True
        )

        def loss(v: torch.Tensor) -> torch.Tensor:
            return ncc_loss(ncc_matrix(_batch(v, [0, 0, 1, 1])))

        assert torch.autograd.gradcheck(loss, (vectors,), rtol=1e-3)


class TestMetaTestLoss:
    def test_default_weights(self):
        assert meta_test_loss(0.5, 0.25, 2.0) == pytest.approx(100 * 0.5 + 100 * 0.25 + 2.0)

    def test_zero_weights_reduce_to_segmentation(self):
        weights = LossWeights(seg=100.0, sim=0.0, ncc=0.0)

        assert meta_test_loss(0.37, 5.0, 9.0, weights) == pytest.approx(37.0)

    def test_tensor_inputs_keep_graph(self):
        seg = torch.tensor(0.5, requires_grad=True)

        total = meta_test_loss(seg, torch.tensor(0.0), torch.tensor(0.0))
        total.backward()

        assert float(seg.grad) == pytest.approx(100.0)

    def test_non_finite_component_named(self):
        with pytest.raises(NonFiniteLossError) as exc_info:
            meta_test_loss(0.1, float("nan"), 0.0)
        assert exc_info.value.component == "L_sim"

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(ncc=-1.0)
