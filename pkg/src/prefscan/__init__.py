"""prefscan: preference-driven active learning for scanning-probe datasets.

Learns a latent utility over image-patch candidates from pairwise expert
comparisons (with ties and confidence weights) and uses it to steer which
grid locations of a pre-acquired dataset are measured next.
"""

from .errors import (
    CandidatesExhausted,
    ConfigurationError,
    DataError,
    FormatError,
    InputError,
    NumericalError,
    PrefscanError,
    StateError,
)
from .judgments import (
    ComparisonRecord,
    Confidence,
    Judgment,
    Outcome,
    Source,
    record_from_judgment,
)
from .network import (
    Architecture,
    NetworkParams,
    PatchTensor,
    backward_features,
    forward_features,
    init_params,
)
from .gp import (
    KernelHyperparams,
    LikelihoodConfig,
    PosteriorState,
    PreferenceModel,
    approx_marginal_log_likelihood,
    comparison_log_likelihood,
    fit_laplace,
    kernel_matrix,
    predict_utility,
    train_joint,
)
from .acquisition import (
    AcquisitionConfig,
    BetaSegment,
    SelectionResult,
    Strategy,
    build_comparison_requests,
    current_best,
    select_pair,
    ucb_scores,
)
from .dataset import (
    Dataset,
    PayloadKind,
    all_patch_inputs,
    extract_patch,
    load_dataset,
    normalize_scalars,
    save_dataset,
)
from .analysis import (
    AngleConfig,
    characteristic_angle,
    characteristic_angle_map,
    loop_area,
    loop_area_map,
    wall_charge_character,
    wall_charge_map,
)
from .oracle import Oracle, OracleConfig, oracle_compare
from .session import (
    ExperimentConfig,
    SessionState,
    StepTrace,
    initialize_session,
    predict_only,
    run_experiment,
    run_step,
)
from .persist import load_model, save_model

__version__ = "0.1.0"
