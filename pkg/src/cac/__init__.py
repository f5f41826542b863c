"""Cautious active clustering with localized Hermite kernels.

The pipeline: a filtered Hermite-function kernel gives a sharply localized
density estimate; thresholding it yields confident support regions; an
eta-neighborhood graph splits them into components; label queries at the
density modes propagate through components across a schedule of kernel
degrees; witness functions classify whatever never became confident.
"""

from .hermite import (
    KernelConfig,
    MehlerWorkspace,
    PsiTable,
    d_coefficient,
    eval_psi_sequence,
    kernel_matrix,
    phi_n,
    phi_rows,
    proj_m_direct,
    proj_m_mehler,
    psi_at_zero,
)
from .filters import FilterH
from .density import (
    DensityField,
    SupportSet,
    density_at,
    density_field,
    gaussian_kde_baseline,
    support_set,
)
from .graphs import (
    Component,
    NeighborGraph,
    build_eta_graph,
    component_mode,
    connected_components,
)
from .active import (
    ActiveState,
    CallbackOracle,
    LabelOracle,
    ReplayOracle,
    RunReport,
    Schedule,
    TruthOracle,
    default_eta_constant,
    eta_for,
    median_nearest_neighbor,
    run,
    run_level,
)
from .witness import (
    WitnessModel,
    certainty,
    classify,
    classify_batch,
    witness_values,
)
from .evaluation import Scorecard, accuracy_suite, cluster_f, micro_f
from .data import (
    Dataset,
    PcaModel,
    ScalingRecord,
    gen_ball_line,
    gen_figure_suite,
    gen_two_moons,
    load_csv,
    pca_fit_transform,
    save_assignments,
    standardize,
)
from .errors import (
    BudgetExhausted,
    ConfigError,
    DataError,
    KernelSizeError,
    MultiIndexCapError,
    ProtocolError,
)

__version__ = "0.1.0"
