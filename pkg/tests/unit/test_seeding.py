from __future__ import annotations

import numpy as np
import torch

from mapdg.core.seeding import component_rng, component_torch_seed, seeded_build


class TestComponentStreams:
    def test_same_name_same_stream(self):
        a = component_rng(5, "episode.mixup").random(8)
        b = component_rng(5, "episode.mixup").random(8)

        np.testing.assert_array_equal(a, b)

    def test_components_are_independent(self):
        a = component_rng(5, "episode.mixup").random(8)
        b = component_rng(5, "episode.shuffle").random(8)
        c = component_rng(6, "episode.mixup").random(8)

        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_torch_seed_range(self):
        seed = component_torch_seed(0, "segnet.init")

        assert 0 <= seed < 2**63
        assert seed == component_torch_seed(0, "segnet.init")
        assert seed != component_torch_seed(1, "segnet.init")


def test_seeded_build_leaves_global_rng_alone():
    torch.manual_seed(123)
    expected = torch.rand(3)

    torch.manual_seed(123)
    first = seeded_build(lambda: torch.nn.Linear(4, 4), 99)
    after = torch.rand(3)
    second = seeded_build(lambda: torch.nn.Linear(4, 4), 99)

    torch.testing.assert_close(after, expected)
    torch.testing.assert_close(first.weight, second.weight)
