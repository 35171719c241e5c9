from __future__ import annotations

import numpy as np
import pytest

from mapdg.core.errors import MapInputError
from mapdg.domains.pseudomod.preprocess import preprocess_d0, rescale_unit
from mapdg.domains.segnet.networks import NonFiniteInputError


class TestRescaleUnit:
    def test_min_max(self):
        out = rescale_unit(np.array([[2.0, 4.0], [3.0, 6.0]]))

        np.testing.assert_allclose(out, [[0.0, 0.5], [0.25, 1.0]])
        assert out.dtype == np.float32

    def test_flat_image_is_clipped_not_divided(self):
        out = rescale_unit(np.full((3, 3), 1.7))

        np.testing.assert_array_equal(out, np.ones((3, 3), dtype=np.float32))


class TestPreprocessD0:
    def test_inverts_dark_vessels(self):
        image = np.full((64, 64), 0.8, dtype=np.float32)
        image[30:34, :] = 0.2

        out = preprocess_d0(image)

        assert out.min() == 0.0 and out.max() == 1.0
        assert out[30:34].mean() > out[:20].mean()

    def test_colour_uses_green_channel(self):
        rng = np.random.default_rng(0)
        green = rng.random((48, 48)).astype(np.float32)
        colour = np.stack([rng.random((48, 48)), green, rng.random((48, 48))], axis=-1).astype(np.float32)

        np.testing.assert_array_equal(preprocess_d0(colour), preprocess_d0(green))

    def test_non_finite(self):
        image = np.zeros((16, 16), dtype=np.float32)
        image[0, 0] = np.nan

        with pytest.raises(NonFiniteInputError):
            preprocess_d0(image)

    @pytest.mark.parametrize("shape", [(16,), (16, 16, 2), (2, 16, 16, 3)])
    def test_bad_shapes(self, shape):
        with pytest.raises(MapInputError):
            preprocess_d0(np.zeros(shape, dtype=np.float32))
