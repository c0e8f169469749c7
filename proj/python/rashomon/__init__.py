"""Four model families that tie on test accuracy but explain the data differently."""

from ._rashomon import (  # noqa: F401
    Dataset,
    Error,
    GenConfig,
    InvalidArgument,
    Model,
    ParseError,
    PerfReport,
    SchemaError,
    SingularError,
    analytic_target_variance,
    couple,
    evaluate,
    fit_forest,
    fit_linear,
    fit_network,
    fit_tree,
    forge,
    from_csv,
    generate,
    is_non_monotonic,
    load_model,
    pdp,
    pdp_ci,
    permutation_importance,
    plot,
    read_csv,
    residual_correlation,
    save_model,
    score,
    write_csv,
)

__version__ = "0.1.0"
