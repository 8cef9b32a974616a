"""Label-free assessment of encoder feature pyramids.

Quantifies where each stage of a feature pyramid sits on the
structure-edge axis: structural coherence (does the stage organize into
coherent, separable regions) and edge fidelity (does it concentrate on
and sharply localize image boundaries). From two encoders' profiles it
derives a master-auxiliary fusion plan: the coherent encoder supplies
the pyramid, the edge-faithful one is injected at its best stride.
"""

__version__ = "0.1.0"

from .ef_metrics import EFParams, EFResult, ec, ef, fc, nc, sp
from .errors import FeatProbeError
from .fusion_planner import (
    FusionPlan,
    StrideProfile,
    assess_encoder,
    build_fusion_plan,
    plan_from_profiles,
    select_injection_stride,
    select_master,
)
from .image_ops import (
    EdgeBands,
    ScalarMap,
    channel_mean_map,
    dilate_disc,
    extract_edge_centerlines,
    hann_power_spectrum,
    l2_norm_map,
    make_edge_bands,
    pca1_map,
    shifted_ncc,
    sobel_gradient,
)
from .kernels import BACKEND
from .numerics import (
    ClusterAssignment,
    PointMatrix,
    kmeans,
    pca_project,
    silhouette,
    spearman,
)
from .sc_metrics import SCParams, SCResult, sc, scs, sfc
from .sensitivity import DEFAULT_GRIDS, SweepSpec, run_sweep
from .tensor_store import (
    FEATURE_STRIDES,
    EncoderFeatureSet,
    FeatureTensor,
    LabelMap,
    load_label_map,
    load_manifest,
    read_feature_tensor,
    read_pgm,
    save_feature_set,
    write_feature_tensor,
    write_label_map,
    write_pgm,
)
from .validation import OutcomePair, SpearmanReport, correlate_profiles, sc_gt

__all__ = [
    "__version__",
    "BACKEND",
    "FEATURE_STRIDES",
    "ClusterAssignment",
    "EFParams",
    "EFResult",
    "EdgeBands",
    "EncoderFeatureSet",
    "FeatProbeError",
    "FeatureTensor",
    "FusionPlan",
    "LabelMap",
    "OutcomePair",
    "PointMatrix",
    "SCParams",
    "SCResult",
    "ScalarMap",
    "SpearmanReport",
    "StrideProfile",
    "SweepSpec",
    "DEFAULT_GRIDS",
    "assess_encoder",
    "build_fusion_plan",
    "channel_mean_map",
    "correlate_profiles",
    "dilate_disc",
    "ec",
    "ef",
    "extract_edge_centerlines",
    "fc",
    "hann_power_spectrum",
    "kmeans",
    "l2_norm_map",
    "load_label_map",
    "load_manifest",
    "make_edge_bands",
    "nc",
    "pca1_map",
    "pca_project",
    "plan_from_profiles",
    "read_feature_tensor",
    "read_pgm",
    "save_feature_set",
    "sc",
    "sc_gt",
    "scs",
    "select_injection_stride",
    "select_master",
    "sfc",
    "shifted_ncc",
    "silhouette",
    "sobel_gradient",
    "sp",
    "spearman",
    "run_sweep",
    "write_feature_tensor",
    "write_label_map",
    "write_pgm",
]
