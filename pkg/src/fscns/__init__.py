"""Fractionally supervised classification for maxima nomination-sampling data."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DataParseError,
    DegenerateFitError,
    DegenerateParameterError,
    EmptyComponentError,
    FscError,
    InsufficientDataError,
)
from .mixture import (  # noqa: E402
    SIGMA_FLOOR,
    ComponentParams,
    MixtureParams,
    RareEventParams,
    log_improper_likelihood,
    log_ns_likelihood,
    mixture_cdf,
    mixture_pdf,
    normal_cdf,
    normal_pdf,
    ns_density,
)
from .sampling import FscDataset, RankingModel, generate_dataset, make_rng  # noqa: E402
from .em import (  # noqa: E402
    EmConfig,
    FitResult,
    LatentPosteriors,
    Weights,
    e_step_ns,
    fit_fsc_ns,
    fit_fsc_srs,
    weighted_loglik,
)
from .metrics import (  # noqa: E402
    adjusted_rand_index,
    auc,
    enrichment_ratio,
    posterior_positive,
    score_classification,
)
