"""Near-field LoS MIMO array design and hybrid beam focusing toolkit."""

from ._kernels import active_backend
from .beamforming import (
    DigitalBeamformer,
    HybridBeamformer,
    asymptotic_hybrid,
    dictionary_rx,
    dictionary_tx,
    digital_svd,
    omp_hybrid,
    phase_extraction_hybrid,
)
from .channel import (
    ChannelParams,
    ChannelSet,
    exact_channel,
    fresnel_factors,
    gram,
    kron_factor_channel,
    prolate_matrix,
    taylor_channel,
)
from .geometry import (
    AntennaLayout,
    ArraySpec,
    LayoutKind,
    Side,
    SpacingSolution,
    aperture,
    aperture_feasible,
    build_layout,
    optimal_spacing,
)
from .linalg import (
    EigenSpectrum,
    SvdResult,
    dft_matrix,
    eig_hermitian,
    kron,
    least_squares,
    svd,
)
from .scenario import Scenario, ScenarioConfig, load_config
from .spectral import (
    ClusterReport,
    PowerAllocation,
    cluster_report,
    dft_diag_quality,
    rate,
    rate_upper_bound,
    transition_band,
    water_filling,
)

__version__ = "0.1.0"
