"""ssdbench: build, aggregate, and score spatio-semantic distributions for the
unobserved object detection benchmark."""

from .geometry import (
    CameraModel,
    ConfidenceCloud,
    RigidTransform,
    back_project,
    back_project_pixels,
    clip_depth,
    concat_clouds,
    frustum_cull,
    outlier_filter,
    project,
    project_points,
    transform_cloud,
    z_cull,
)
from .grid import (
    ImageDomain,
    SpatialDistribution,
    Thresholds,
    VoxelDomain,
    detection_label,
    softmax_normalize,
    threshold,
    voxelize_nonzero_mean,
)
from .groundtruth import (
    Detection,
    PosedFrame,
    build_label_cloud,
    detection_confidence_map,
    gt_25d,
    gt_2d,
    gt_3d,
)
from .aggregate import RegionCounts, aggregate_2d, aggregate_3d, lift_2d_to_25d, vlm_region_distribution
from .metrics import (
    MetricReport,
    PairMetrics,
    aggregate_report,
    cross_entropy,
    entropy,
    evaluate_pair,
    find_peaks,
    fnr,
    grid_diameter,
    nn_distance,
    region_accuracy,
    total_variation,
)
from .baselines import oracle, oracle_25d, uniform_baseline
from .calibrate import NoKneeError, RetentionCurve, bbox_rate_curve, knee, retention_curve
from .synth import (
    SceneObject,
    SimulatedSampler,
    SyntheticScene,
    analytic_metrics,
    draw_sample,
    make_scene,
    softmax_matched_weights,
)

__version__ = "0.1.0"
