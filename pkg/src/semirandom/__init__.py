"""Gated random-feature networks: models, training, closed-form optima,
and capacity bound calculators."""

from .bounds import (
    KAPPA,
    BoundInputs,
    approx_lower_bound,
    empirical_bound_inputs,
    expected_risk_bound,
    generalization_bound,
    importance_constants,
    random_feature_lower_bound,
)
from .data import Dataset, gen_sine, load_csv, load_libsvm, normalize, split_dataset
from .errors import DivergenceError, ParameterError, ParseError, ShapeError
from .features import (
    RandomDirection,
    activation,
    sample_direction,
    sample_first_layer_gates,
    sample_inner_gates,
    seeded_stream,
    semi_random_feature,
)
from .linalg import hadamard, least_squares, matmul, project_onto_colspace
from .network import (
    ImplicitEnsembleNet,
    ReluNet,
    SemiRandomNet,
    augment,
    load_model,
    parse_arch,
    save_model,
)
from .oracle import (
    GdConfig,
    LandscapeReport,
    OracleReport,
    PathTensors,
    ShallowInstance,
    build_design,
    global_min_loss,
    oracle_report,
    param_count,
    path_tensors,
    random_instance,
    recover_optimal_weights,
    shallow_net,
    verify_landscape,
)
from .training import (
    TrainConfig,
    TrainHistory,
    evaluate,
    gradients,
    lr_schedule,
    sgd_momentum_step,
    softmax_cross_entropy,
    squared_loss,
    train,
)

__version__ = "0.1.0"
