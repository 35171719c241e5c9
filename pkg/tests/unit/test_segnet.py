from __future__ import annotations

import pytest
import torch
from torch.func import functional_call

from mapdg.core.errors import MapInputError
from mapdg.domains.losses.functional import seg_loss
from mapdg.domains.segnet.checkpoint import CheckpointMismatchError, load_checkpoint, save_checkpoint
from mapdg.domains.segnet.networks import (
    SEGNET_CHANNELS,
    NonFiniteInputError,
    ResidualUNet,
    SegNet,
    SynthesisNet,
)
from mapdg.domains.segnet.service import (
    build_segnet,
    build_synthesis_net,
    parameter_count,
    seg_forward,
    synth_forward,
)


class TestSegNet:
    def test_plan_and_feature_dim(self):
        net = build_segnet(0)

        assert net.channels == SEGNET_CHANNELS
        assert net.feature_dim == 32
        assert net.downsample_factor == 4

    @pytest.mark.parametrize("size", [(64, 64), (50, 70), (33, 47)])
    def test_output_shapes(self, size):
        net = build_segnet(0).eval()

        out = seg_forward(net, torch.rand(2, *size))

        assert out.logits.shape == (2, 2, *size)
        assert out.z.shape == (2, 32)

    def test_single_image_promoted(self):
        out = seg_forward(build_segnet(0).eval(), torch.rand(40, 40))

        assert out.logits.shape == (1, 2, 40, 40)

    def test_same_seed_same_parameters(self):
        a, b = build_segnet(3), build_segnet(3)

        for pa, pb in zip(a.parameters(), b.parameters()):
            torch.testing.assert_close(pa, pb)

    def test_architecture_does_not_depend_on_seed(self):
        assert parameter_count(build_segnet(0)) == parameter_count(build_segnet(1)) > 0

    def test_outputs_finite_with_nonzero_features(self):
        net = build_segnet(0).eval()
        generator = torch.Generator().manual_seed(0)

        with torch.no_grad():
            for _ in range(100):
                out = seg_forward(net, torch.rand(1, 32, 32, generator=generator))

                assert bool(torch.isfinite(out.logits).all())
                assert bool(torch.isfinite(out.z).all())
                assert float(out.z.norm()) > 0.0

    def test_feature_norm_gradient_matches_finite_differences(self):
        net = build_segnet(0).double().eval()
        image = torch.rand(1, 8, 8, generator=torch.Generator().manual_seed(1), dtype=torch.float64)
        image.requires_grad_(True)

        assert torch.autograd.gradcheck(lambda x: seg_forward(net, x).z.pow(2).sum(), (image,), rtol=1e-3)

    def test_non_finite_input(self):
        image = torch.rand(32, 32)
        image[3, 4] = float("nan")

        with pytest.raises(NonFiniteInputError) as exc_info:
            seg_forward(build_segnet(0), image)
        assert exc_info.value.count == 1

    def test_rejects_colour_batch(self):
        with pytest.raises(MapInputError):
            seg_forward(build_segnet(0), torch.rand(1, 3, 32, 32))

    def test_odd_channel_plan(self):
        with pytest.raises(MapInputError):
            ResidualUNet(1, 2, (8, 16, 32))


class TestSynthesisNet:
    def test_latent_is_single_channel_full_resolution(self):
        net = build_synthesis_net(0).eval()

        out = synth_forward(net, torch.rand(3, 45, 61))

        assert out.latent.shape == (3, 1, 45, 61)
        assert out.logits.shape == (3, 2, 45, 61)

    def test_segmentation_loss_gradient_in_parameters(self):
        net = build_synthesis_net(0).double().eval()
        generator = torch.Generator().manual_seed(2)
        image = torch.rand(1, 8, 8, generator=generator, dtype=torch.float64)
        target = torch.randint(0, 2, (1, 8, 8), generator=generator)
        name = "encoder.head.weight"
        weight = dict(net.named_parameters())[name].detach().clone().requires_grad_(True)

        def loss(w: torch.Tensor) -> torch.Tensor:
            return seg_loss(functional_call(net, {name: w}, (image,)).logits, target)

        assert torch.autograd.gradcheck(loss, (weight,), rtol=1e-3)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        source = build_segnet(1)
        target = build_segnet(2)
        path = save_checkpoint(tmp_path / "net.pt", source, kind="segnet", config={"epochs": 1})

        payload = load_checkpoint(path, target, kind="segnet")

        assert payload["config"] == {"epochs": 1}
        for pa, pb in zip(source.parameters(), target.parameters()):
            torch.testing.assert_close(pa, pb)

    def test_wrong_kind(self, tmp_path):
        path = save_checkpoint(tmp_path / "net.pt", build_segnet(1), kind="segnet", config={})

        with pytest.raises(CheckpointMismatchError, match="expected 'synthesis'"):
            load_checkpoint(path, build_segnet(1), kind="synthesis")

    def test_shape_table_mismatch(self, tmp_path):
        path = save_checkpoint(tmp_path / "net.pt", SynthesisNet(), kind="segnet", config={})

        with pytest.raises(CheckpointMismatchError, match="shape table"):
            load_checkpoint(path, SegNet(), kind="segnet")

    def test_missing_file(self, tmp_path):
        with pytest.raises(CheckpointMismatchError, match="does not exist"):
            load_checkpoint(tmp_path / "absent.pt", SegNet(), kind="segnet")
