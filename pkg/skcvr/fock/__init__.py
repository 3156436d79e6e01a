# flake8: noqa

from skcvr.fock.channels import (
    DeviceImperfections,
    KrausChannel,
    amplifier_channel,
    apply_detector_imperfection,
    apply_loss,
    apply_source_imperfection,
    click_probability,
    dark_count_mean_photons,
    imperfection_wrap,
    pure_loss_channel,
    thermal_loss_channels,
)
from skcvr.fock.gates import (
    apply_beamsplitter,
    apply_displacement,
    apply_mode_operator,
    apply_passive_unitary,
    apply_phase,
    apply_squeezing,
    beamsplitter_unitary,
    displacement_matrix,
    fourier_unitary,
)
from skcvr.fock.measurement import (
    dual_homodyne_project,
    dual_homodyne_swap,
    partial_trace,
    project_pattern,
    project_photons,
    project_total_photons,
    single_mode_marginal,
    swap_density,
)
from skcvr.fock.metrics import (
    StateMetrics,
    covariance_of,
    fidelity,
    purity,
    rci,
    reduced_entropy,
    state_metrics,
    von_neumann_entropy,
)
from skcvr.fock.state import (
    DensityOp,
    FockArray,
    State,
    as_density,
    make_coherent,
    make_fock,
    make_tmsv,
    tensor,
    vacuum,
)
