"""Locality analysis and locality-promoting regularization for conv kernels."""

from locoreg.cohesion import (
    CENTER,
    CORNERS,
    DOMINANCE_CASES,
    NEIGHBORS,
    DominanceReport,
    ForceParams,
    MassGrid,
    Violation,
    cohesion_gradient,
    critical_epsilon,
    pairwise_force,
    total_cohesion,
    verify_center_dominance,
)
from locoreg.io import (
    FORMAT_TAG,
    FormatError,
    emit_pgm,
    read_kernelset,
    read_map_csv,
    read_map_pgm,
    write_kernelset,
)
from locoreg.localization import (
    STRATEGIES,
    FeatureMap2D,
    Placement,
    locate_features,
    patch_score,
)
from locoreg.noise import (
    WINDOW_MODES,
    NoiseSpec,
    StrengthProfile,
    Window1D,
    convolve_and_locate,
    default_profile,
    expectation_gap,
    optimal_window,
    simulate_gap_variance,
    worst_case_gap,
)
from locoreg.regularizer import (
    NEUTRAL,
    Kernel,
    RegSpec,
    distance_class_loss,
    factor_grid,
    format_regspec,
    loco_grad,
    loco_loss,
    normalization_Z,
    parse_regspec,
    pattern_weights,
    squared_distance_classes,
)
from locoreg.stats import (
    CENTER_CLASS,
    DIAG_CLASS,
    NEAR_CLASS,
    SUBSETS,
    DegenerateLayerError,
    IndexClasses,
    KernelLayer,
    KernelSet,
    ProfileRow,
    ScheduleEntry,
    aggregate_profile,
    affine_modulation,
    class_label,
    derive_schedule,
    eligible_layers,
    format_schedule,
    group_mean,
    index_classes,
    layer_profile,
    parse_schedule,
    profile_table,
    significance_stars,
    student_cdf,
    t_test_one_sided,
)
from locoreg.tinycnn import (
    Dataset,
    TinyNet,
    TinyNetConfig,
    TrainConfig,
    TrainReport,
    error_rate,
    forward,
    loss_and_grads,
    make_shapes,
    new_network,
    snapshot_kernels,
    train,
    train_step,
)

__version__ = "0.1.0"
