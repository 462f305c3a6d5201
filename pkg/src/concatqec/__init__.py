"""Exact effective one-qubit channels of concatenated quantum error-correcting
codes (5-qubit, Steane-7, Shor-9) under fluctuating physical noise, with the
Monte Carlo statistics of channel-fidelity and process-matrix fluctuations."""

__version__ = "0.1.0"

from .channels import (
    NotCPTPError,
    apply_channel_to_qubit,
    apply_unitary,
    channel_fidelity,
    channel_from_json,
    channel_to_json,
    check_choi,
    check_kraus,
    check_ptm,
    choi_to_kraus,
    convex_combine,
    kraus_to_choi,
    kraus_to_natural,
    kraus_to_ptm,
    natural_to_ptm,
    partial_trace_keep_last,
    ptm_to_natural,
    reshuffle,
    vectorize,
)
from .codes import (
    CodeError,
    CodeSpec,
    PauliString,
    build_encoding_unitary,
    five_qubit_code,
    get_code,
    shor_code,
    steane_code,
    validate_code,
)
from .effective import (
    AverageRecursion,
    CodeKernel,
    average_recursion,
    effective_ptm,
    effective_ptm_dense_oracle,
    layer_from_ptms,
)
from .experiment import (
    ExperimentConfig,
    LevelStats,
    ThresholdError,
    ThresholdResult,
    attenuation_report,
    rough_estimate_sd,
    run_montecarlo,
    shor_oscillation_report,
    threshold_search,
    write_run_outputs,
)
from .noise import (
    AVERAGE_UNITARY_KRAUS,
    AVERAGE_UNITARY_PTM,
    BaseModelSpec,
    GenerationError,
    NoiseSample,
    PerturbedModelSpec,
    amplitude_damping_kraus,
    appendix_fixture,
    average_perturbed,
    depolarizing_ptm,
    perturbed_channel,
    random_cptp_with_fidelity,
    sample_unitary,
    unitary_channel_ptm,
)
