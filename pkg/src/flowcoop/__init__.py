"""flowcoop: nonparametric motion-flow models for human-robot cooperation.

Learn velocity-field models from demonstrated hand motions, recognize
(possibly partial) motions with an alignment-free GP similarity, learn a
cooperation reward from interacting demonstrations, and plan a collaborating
arm trajectory by reward-weighted combination of smooth path samples.
"""

from .arm import ArmModel, default_arm, forward_kinematics, ik_solve
from .datagen import ModeSpec, default_modes, generate, split_dataset
from .errors import NumericError, SchemaError, ValidationError
from .flow import (FlowModel, FlowModelBank, build_adjacency, describe,
                   flow_similarity, pairwise_similarity, spectral_cluster,
                   train_bank)
from .gp import (GPModel, PathDistribution, SEKernel, apply_runup, gp_fit,
                 gp_predict, grp_distribution, grp_sample)
from .harness import SweepConfig, rms_error, run_obstacle_study, run_sweep
from .pipeline import (TrainConfig, TrainedModels, load_artifact,
                       save_artifact, train_pipeline)
from .planner import (CooperationPlanner, Obstacle, PlanConfig, PlanResult,
                      barrier_cost, estimate_final_pose, plan, softmax_weights)
from .reward import (FeaturePoint, RewardModel, estimate_density,
                     extract_features, fit_reward, reward_of,
                     trajectory_reward)
from .trajectories import (Dataset, InteractionDemo, Trajectory, load_dataset,
                           preprocess, save_dataset)

__version__ = "0.1.0"

__all__ = [
    "ArmModel", "CooperationPlanner", "Dataset", "FeaturePoint", "FlowModel",
    "FlowModelBank", "GPModel", "InteractionDemo", "ModeSpec", "NumericError",
    "Obstacle", "PathDistribution", "PlanConfig", "PlanResult", "RewardModel",
    "SEKernel", "SchemaError", "SweepConfig", "TrainConfig", "TrainedModels",
    "Trajectory", "ValidationError", "apply_runup", "barrier_cost",
    "build_adjacency", "default_arm", "default_modes", "describe",
    "estimate_density", "estimate_final_pose", "extract_features",
    "fit_reward", "flow_similarity", "forward_kinematics", "generate",
    "gp_fit", "gp_predict", "grp_distribution", "grp_sample", "ik_solve",
    "load_artifact", "load_dataset", "pairwise_similarity", "plan",
    "preprocess", "reward_of", "rms_error", "run_obstacle_study", "run_sweep",
    "save_artifact", "save_dataset", "softmax_weights", "spectral_cluster",
    "split_dataset", "train_bank", "train_pipeline", "trajectory_reward",
]
