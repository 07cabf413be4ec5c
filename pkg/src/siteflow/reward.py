"""Shaped per-step reward: dense guidance plus sparse terminal bonuses.

Dense terms reward daily progress, penalize late days in two bands, and track
the daily cash delta split by the labor/material cost shares.  Sparse terms
fire once: -1 on failure, a lateness penalty on completion past 70% of the
deadline, and cost-saving bonuses when the project finishes under the labor
and material budget shares of the total milestone income.  The sparse cash
bonuses are divided by the total milestone income so every component stays
of order one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .env import CONCRETE, State, StepStatus


@dataclass(frozen=True)
class RewardWeights:
    progress: float
    labor_dense: float
    material_dense: float
    duration_dense: float
    labor_sparse: float
    material_sparse: float
    duration_sparse: float
    failure: float


# preset weight vectors for the four single-network agents; the double
# network agent trains its hour network on preset 3 and its order network
# on preset 4
AGENT_WEIGHTS = {
    1: RewardWeights(0.5, 0.25, 0.25, 0.5, 2.0, 2.0, 1.0, 0.15),
    2: RewardWeights(0.5, 1.0, 0.125, 0.5, 8.0, 1.0, 1.0, 0.15),
    3: RewardWeights(0.5, 2.0, 0.0, 0.5, 16.0, 0.0, 1.0, 0.15),
    4: RewardWeights(0.5, 0.0, 0.25, 0.5, 0.0, 2.0, 1.0, 0.15),
}


@dataclass(frozen=True)
class RewardBreakdown:
    progress_dense: float
    duration_dense: float
    labor_dense: float
    material_dense: float
    failure_sparse: float
    duration_sparse: float
    labor_sparse: float
    material_sparse: float
    total: float


def compute_reward(prev: State, cur: State, step_status: StepStatus,
                   weights: RewardWeights, params) -> RewardBreakdown:
    """Reward for the transition prev -> cur (the day ``prev.day``)."""
    day = prev.day
    max_days = params.max_days
    total_area = params.total_area
    milestone_total = params.floors * params.floor_payment

    progress = (cur.done_area[CONCRETE] - prev.done_area[CONCRETE]) / total_area

    if day < 0.7 * max_days:
        duration_dense = 0.0
    elif day < 0.85 * max_days:
        duration_dense = -1.0 / max_days
    else:
        duration_dense = -4.0 / max_days

    delta_cash = cur.cash - prev.cash
    labor_dense = params.labor_cost_share * delta_cash / milestone_total
    material_dense = params.material_cost_share * delta_cash / milestone_total

    failure = -1.0 if step_status in (StepStatus.FAILED_COST,
                                      StepStatus.FAILED_TIME) else 0.0

    duration_sparse = 0.0
    labor_sparse = 0.0
    material_sparse = 0.0
    if step_status is StepStatus.COMPLETED:
        duration_sparse = min(0.0, 0.7 - day / max_days)
        labor_sparse = max(
            0.0, params.labor_cost_share * milestone_total - cur.labor_cost
        ) / milestone_total
        material_sparse = max(
            0.0, params.material_cost_share * milestone_total
            - cur.material_cost) / milestone_total

    total = (weights.progress * progress
             + weights.labor_dense * labor_dense
             + weights.material_dense * material_dense
             + weights.duration_dense * duration_dense
             + weights.labor_sparse * labor_sparse
             + weights.material_sparse * material_sparse
             + weights.duration_sparse * duration_sparse
             + weights.failure * failure)
    return RewardBreakdown(progress, duration_dense, labor_dense,
                           material_dense, failure, duration_sparse,
                           labor_sparse, material_sparse, total)
