"""Social-force-structured neural networks for pedestrian trajectory prediction.

Simulates single pedestrians with the social force model, synthesizes
training data, trains small physics-structured networks to emit the model's
forces, rolls trajectories forward in open loop, classifies the most likely
goal among exits, and benchmarks against constant-velocity/acceleration
baselines.
"""

from .baselines import ca_baseline, cv_baseline
from .benchmark import (
    EvalProtocol,
    ObservedTrack,
    format_results_table,
    load_tracks,
    resample,
    run_benchmark,
    write_results_csv,
)
from .datasets import (
    DatasetSplit,
    SampleRecord,
    gen_corridor_dataset,
    gen_open_dataset,
    make_windows,
    read_dataset_csv,
    sample_params,
    write_dataset_csv,
)
from .estimators import Net1ForceRegressor, Net2ForceRegressor
from .forces import (
    GoalSpec,
    PedState,
    SfmParams,
    Trajectory,
    WallSegment,
    attractive_force,
    read_trajectory_csv,
    simulate,
    step,
    total_force,
    wall_force,
    write_trajectory_csv,
)
from .goals import (
    GoalBelief,
    GoalClassifierConfig,
    classify,
    likelihood,
    update_beliefs,
    write_beliefs_csv,
)
from .metrics import fde, mde
from .networks import (
    Net1Weights,
    Net2Weights,
    NetInput,
    TrajectoryWindow,
    backward,
    features,
    init_net1,
    init_net2,
    load_weights,
    net1_forward,
    net2_forward,
    param_count,
    save_weights,
)
from .rollout import RolloutConfig, infer_mass, rollout
from .scenarios import (
    Scenario,
    WaypointArea,
    corridor_scenario,
    load_scenario,
    open_scenario,
    resolve_scenario,
    save_scenario,
)
from .training import TrainConfig, TrainReport, adam_step, mse_loss, train

__version__ = "0.1.0"
