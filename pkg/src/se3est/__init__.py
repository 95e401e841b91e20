"""Variational pose and velocity estimation on SE(3) from landmark and
inertial vector measurements, with a rigid-body truth simulator, sensor
synthesizer and experiment harness."""

from .errors import (ConfigError, EstimationError, InsufficientVectors,
                     NoConvergence, NotSkew, ParseError, RankDeficient,
                     UnknownBeacon)
from .estimator import (EstimatorGains, EstimatorInput, EstimatorState,
                        continuous_rhs, continuous_step, error_metrics,
                        lgvi_step, lgvi_step_full, potential_gradient,
                        solve_F, solve_incremental_rotation, total_energy,
                        translational_residual, wahba_cost, wahba_gradient,
                        xi_hat_of)
from .harness import (ExperimentConfig, RunLog, RunRecord, load_config,
                      read_log, reference_config, run_experiment, save_config,
                      truth_log, write_log)
from .liegroups import (Pose, Twist, ad, ad_star, adjoint, exp_se3, exp_so3,
                        hat, is_rotation, left_jacobian_so3, log_so3,
                        principal_angle, vex)
from .measproc import (FilterState, MeanPair, VectorSet, assemble_vector_set,
                       butterworth2_step, make_butterworth, mean_pair,
                       velocity_from_gyro, velocity_from_points)
from .sensors import (BeaconMap, Camera, CameraRig, MeasurementFrame,
                      NoiseModel, cube_vertex_map, measure_inertial,
                      measure_point_velocities, measure_positions,
                      measure_twist, planar_rig, read_frames, sample_bump,
                      synthesize_frame, visible_beacons, write_frames)
from .truthsim import (BodyParams, SimConfig, TrueState, WrenchProfile,
                       generate_trajectory, make_wrench, step_truth)

__version__ = "0.1.0"
