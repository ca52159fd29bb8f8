"""wheelplan: self-supervised path planning data pipeline for a robotic
wheelchair. Perception images become body-frame costmaps, classical planners
produce fixed 25-node path labels and image-frame masks, and a closed-loop
simulator with intermediate goals evaluates the whole loop."""

from .camera import CameraModel, default_camera, forward_camera
from .costmap import (
    FREE,
    OCCUPIED,
    UNKNOWN,
    Costmap,
    RobotFootprint,
    build_costmap,
    costmap_distance,
    load_costmap,
    project_to_body,
    save_costmap,
)
from .errors import (
    ContractViolation,
    DegenerateFit,
    FrameGap,
    InsufficientSamples,
    InvalidScene,
    NoFreeSpace,
    NoPathFound,
    ParseError,
    WheelplanError,
)
from .evaluation import (
    EvalRecord,
    bin_by_quality,
    check_success,
    evaluate_manifest,
    evaluate_suite,
    sr_trend_slope,
    turning_cost,
)
from .geometry import Pose2D, wrap_angle
from .labels import (
    BinaryMask,
    generate_dataset,
    goal_mask,
    perceived_costmap,
    project_to_mask,
    read_manifest,
    sample_goal,
    write_manifest,
)
from .navigation import (
    GoalArray,
    NavigationReport,
    WorldMap,
    WorldPath,
    generate_intermediate_goals,
    plan_global,
    sense_costmap,
    simulate_navigation,
    visible,
)
from .planeloss import (
    LossReport,
    LossWeights,
    PlaneFit,
    combined_losses,
    fit_ground_plane,
    fit_plane,
    loss_ep,
    loss_er,
    loss_ip,
    loss_ir,
)
from .planners import (
    GridPath,
    PlannedPath,
    PlannerParams,
    collision_check,
    plan,
    plan_label,
    read_path_csv,
    resample,
    snap_goal,
    write_path_csv,
)
from .scene import (
    DepthImage,
    ObstacleSpec,
    PointCloud,
    SceneSpec,
    SemanticImage,
    backproject,
    filter_outliers,
    generate_scene,
)
from .sceneio import (
    load_camera,
    load_depth,
    load_mask,
    load_semantic,
    save_camera,
    save_depth,
    save_mask,
    save_semantic,
)
from .util import __version__
from .worlds import corridor_world, open_world

__all__ = [
    "__version__",
    "BinaryMask", "CameraModel", "ContractViolation", "Costmap", "DegenerateFit",
    "DepthImage", "EvalRecord", "FrameGap", "FREE", "GoalArray", "GridPath",
    "InsufficientSamples", "InvalidScene", "LossReport", "LossWeights",
    "NavigationReport", "NoFreeSpace", "NoPathFound", "OCCUPIED", "ObstacleSpec",
    "ParseError", "PlaneFit", "PlannedPath", "PlannerParams", "PointCloud",
    "Pose2D", "RobotFootprint", "SceneSpec", "SemanticImage", "UNKNOWN",
    "WheelplanError", "WorldMap", "WorldPath",
    "backproject", "bin_by_quality", "build_costmap", "check_success",
    "collision_check", "combined_losses", "corridor_world", "costmap_distance",
    "default_camera", "evaluate_manifest", "evaluate_suite", "filter_outliers",
    "fit_ground_plane", "fit_plane", "forward_camera", "generate_dataset",
    "generate_intermediate_goals", "generate_scene", "goal_mask", "load_camera",
    "load_costmap", "load_depth", "load_mask", "load_semantic", "loss_ep",
    "loss_er", "loss_ip", "loss_ir", "open_world", "perceived_costmap", "plan",
    "plan_global", "plan_label", "project_to_body", "project_to_mask",
    "read_manifest", "read_path_csv", "resample", "sample_goal", "save_camera",
    "save_costmap", "save_depth", "save_mask", "save_semantic", "sense_costmap",
    "simulate_navigation", "snap_goal", "sr_trend_slope", "turning_cost",
    "visible", "wrap_angle", "write_manifest", "write_path_csv",
]
