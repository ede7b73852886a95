"""Entropic unbalanced transport, stain optics and pathology losses."""

from ._core import (
    DEFAULT_EPSILON,
    DEFAULT_LAMBDA_CC,
    DEFAULT_LAMBDA_TCYC,
    DEFAULT_NCE_TEMPERATURE,
    DEFAULT_TAU,
    TransportPlan,
    UotkitError,
    cc_loss,
    correlation_matrix,
    dab_channel,
    deconvolve,
    fid,
    focal_od,
    h_dab_stains,
    iod,
    lp_balanced,
    make_stain_pair,
    nce_loss,
    neg_cosine_cost,
    odc_loss,
    pearson,
    primal_objective,
    solve,
    tcyc_residual,
    total_loss,
    uot_dense_search,
)

__version__ = "0.1.0"
