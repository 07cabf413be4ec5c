"""Daily resource-flow control for multistory concrete building projects.

A seeded discrete-event simulator of one project's work, cash, labor,
material, and external flows; PPO-trained network controllers; the static
empirical rule policy; and a genetic-algorithm trajectory baseline.
"""

from .scenario import (ModelParams, ScenarioSpec, load_scenario, load_config,
                       validate)
from .exogenous import (AnnualCurves, BaselineParams, forecast_cash_inflow,
                        forecast_price, forecast_weather, sample_year,
                        sample_project_curves)
from .env import Action, State, StepStatus, init_state, step
from .observe import (NormStats, OBS_DIM, ACTION_DIM, build_observation,
                      denormalize_action, normalize_action)
from .reward import AGENT_WEIGHTS, RewardBreakdown, RewardWeights, \
    compute_reward
from .agents import (AGENT_KINDS, Agent, act, create_agent,
                     empirical_material_order, empirical_work_hours,
                     load_agent, save_agent)
from .neural import AdamState, NetworkBundle, gaussian_logp
from .trainer import RolloutBuffer, TrainConfig, collect, gae, ppo_update, \
    train
from .baseline_ga import GaConfig, chromosome_length, decode, encode, \
    evaluate, evolve
from .simulate import EpisodeResult, run_action_sequence, run_episode

__version__ = "0.1.0"
