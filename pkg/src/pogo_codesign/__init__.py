"""Learning spring and damper designs for a bang-bang driven pogo-stick jumper."""
from .command import (ImpulseSequence, JumpCommand, accel_at, actuator_kinematics,
                      command_for, convolution_check, idle_command, make_command,
                      times_from_geometry, tune_delay)
from .env import (DesignEnv, DesignSpace, EpisodeResult, Observation, QuadraticBandit, RewardCase,
                  action_to_design, episode, observe, reset, reward_max_height,
                  reward_specified_height)
from .sim import (DerivedParams, DesignParams, PogoState, SimConfig, Trajectory, apex_height,
                  contact_indicator, damping_coefficient, enforce_stop, integrate_step,
                  rod_acceleration, simulate)
from .sweep import DesignGrid, PerformanceSurface, argmax_design, sweep, target_band
from .td3 import ReplayBuffer, Td3Agent, Td3Config, TrainingLog, train_run

__version__ = "0.1.0"
