from mapdg.domains.mixup.dirichlet import (
    GridHistogram,
    dirichlet_logpdf,
    dirichlet_pdf,
    lambda_grid_histogram,
    sample_lambda,
    sample_lambdas,
)
from mapdg.domains.mixup.schemas import (
    DirichletParams,
    DumpConfig,
    MixupCoefficients,
    MixupSample,
    OffSimplexError,
)
from mapdg.domains.mixup.service import (
    EmptyBankError,
    ShapeMismatchError,
    draw_meta_test_batch,
    mix,
    mix_images,
    tile_grid,
)

__all__ = [
    "DirichletParams",
    "DumpConfig",
    "EmptyBankError",
    "GridHistogram",
    "MixupCoefficients",
    "MixupSample",
    "OffSimplexError",
    "ShapeMismatchError",
    "dirichlet_logpdf",
    "dirichlet_pdf",
    "draw_meta_test_batch",
    "lambda_grid_histogram",
    "mix",
    "mix_images",
    "sample_lambda",
    "sample_lambdas",
    "tile_grid",
]
