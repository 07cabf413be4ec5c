"""Episode execution, daily logs, and aggregate run reports."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import Agent, act
from .env import Action, StepStatus, init_state, step
from .exogenous import sample_project_curves
from .observe import build_observation
from .reward import AGENT_WEIGHTS, compute_reward

LOG_COLUMNS = [
    "day",
    "hours_rebar", "hours_formwork", "hours_concrete",
    "order_rebar", "order_formwork", "order_concrete",
    "area_rebar", "area_formwork", "area_concrete",
    "stock_rebar", "stock_formwork", "stock_concrete",
    "forms_in_use", "cash", "inflow", "outflow",
    "price_rebar", "price_formwork", "price_concrete",
    "temp", "rain", "wind",
    "fatigue_rebar", "fatigue_formwork", "fatigue_concrete",
    "weather_eff", "reward", "status",
    "r_progress", "r_duration_dense", "r_labor_dense", "r_material_dense",
    "r_failure", "r_duration_sparse", "r_labor_sparse", "r_material_sparse",
]


@dataclass
class EpisodeResult:
    status: StepStatus
    duration: int           # days actually worked
    npv: float              # end cash minus start cash
    labor_cost: float
    material_cost: float
    total_reward: float
    final_state: object
    log_rows: list = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.status is StepStatus.COMPLETED

    @property
    def total_cost(self) -> float:
        return self.labor_cost + self.material_cost


def _log_row(prev, state, action, breakdown, st):
    return [
        prev.day,
        *action.hours, *action.orders,
        *state.done_area, *state.stock, state.forms_in_use,
        state.cash, state.inflow, state.outflow,
        *prev.prices, prev.temp, prev.rain, prev.wind,
        *state.fatigue, state.weather_eff,
        breakdown.total, st.value,
        breakdown.progress_dense, breakdown.duration_dense,
        breakdown.labor_dense, breakdown.material_dense,
        breakdown.failure_sparse, breakdown.duration_sparse,
        breakdown.labor_sparse, breakdown.material_sparse,
    ]


def run_episode(agent: Agent, params, rng_or_seed, weights=None,
                mode: str = "mean", collect_log: bool = False)\
        -> EpisodeResult:
    """Simulate one project under a policy.

    Network agents run with frozen normalization statistics; ``mode="mean"``
    suppresses action sampling so only the environment is stochastic.
    """
    rng = rng_or_seed if hasattr(rng_or_seed, "standard_normal") \
        else np.random.default_rng(rng_or_seed)
    if weights is None:
        weights = AGENT_WEIGHTS[1]
    curves = sample_project_curves(params, rng)
    state = init_state(params, curves)
    total_reward = 0.0
    rows = []
    while True:
        obs = build_observation(state, curves, params, rng)
        action, _, _ = act(agent, obs, params, rng, mode=mode)
        new_state, st = step(state, action, curves, params, rng)
        breakdown = compute_reward(state, new_state, st, weights, params)
        total_reward += breakdown.total
        if collect_log:
            rows.append(_log_row(state, new_state, action, breakdown, st))
        state = new_state
        if st is not StepStatus.RUNNING:
            return EpisodeResult(
                status=st, duration=state.day - 1,
                npv=state.cash - params.init_cash,
                labor_cost=state.labor_cost,
                material_cost=state.material_cost,
                total_reward=total_reward, final_state=state, log_rows=rows)


def run_action_sequence(actions, params, rng_or_seed, weights=None,
                        collect_log: bool = False) -> EpisodeResult:
    """Replay a fixed (max_days, 6) action table; no observations needed."""
    rng = rng_or_seed if hasattr(rng_or_seed, "standard_normal") \
        else np.random.default_rng(rng_or_seed)
    if weights is None:
        weights = AGENT_WEIGHTS[1]
    actions = np.asarray(actions, dtype=float)
    curves = sample_project_curves(params, rng)
    state = init_state(params, curves)
    total_reward = 0.0
    rows = []
    while True:
        row = actions[state.day - 1]
        action = Action(hours=row[:3], orders=row[3:])
        new_state, st = step(state, action, curves, params, rng)
        breakdown = compute_reward(state, new_state, st, weights, params)
        total_reward += breakdown.total
        if collect_log:
            rows.append(_log_row(state, new_state, action, breakdown, st))
        state = new_state
        if st is not StepStatus.RUNNING:
            return EpisodeResult(
                status=st, duration=state.day - 1,
                npv=state.cash - params.init_cash,
                labor_cost=state.labor_cost,
                material_cost=state.material_cost,
                total_reward=total_reward, final_state=state, log_rows=rows)


def write_daily_log(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for row in rows:
            writer.writerow([val if isinstance(val, (int, str))
                             else repr(float(val)) for val in row])


def build_report(scenario_id, agent_label, seed_results: dict) -> dict:
    """Aggregate per-seed episode results into one report dict."""
    per_seed = []
    for seed, res in seed_results.items():
        per_seed.append({
            "seed": seed,
            "completed": bool(res.completed),
            "duration": res.duration,
            "labor_cost": res.labor_cost,
            "material_cost": res.material_cost,
            "total_cost": res.total_cost,
            "npv": res.npv,
            "reward": res.total_reward,
        })
    agg = {
        "completion_rate": float(np.mean([r["completed"] for r in per_seed])),
        "mean_duration": float(np.mean([r["duration"] for r in per_seed])),
        "mean_labor_cost": float(np.mean([r["labor_cost"] for r in per_seed])),
        "mean_material_cost": float(
            np.mean([r["material_cost"] for r in per_seed])),
        "mean_total_cost": float(np.mean([r["total_cost"] for r in per_seed])),
        "mean_npv": float(np.mean([r["npv"] for r in per_seed])),
        "mean_reward": float(np.mean([r["reward"] for r in per_seed])),
    }
    return {"scenario": scenario_id, "agent": agent_label,
            "per_seed": per_seed, "aggregate": agg}


def write_report(path, report: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_report(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


_GAIN_METRICS = ["mean_duration", "mean_labor_cost", "mean_material_cost",
                 "mean_total_cost", "mean_npv", "mean_reward"]


def comparison_table(reports: list[dict], baseline_index: int = 0)\
        -> tuple[list[dict], list[str]]:
    """Mean and percentage-gain columns against a designated baseline run.

    Returns (rows, warnings); mismatched scenario ids produce a warning but
    still compare.
    """
    warnings = []
    base = reports[baseline_index]
    scenarios = {r["scenario"] for r in reports}
    if len(scenarios) > 1:
        warnings.append(
            f"comparing runs from different scenarios: {sorted(scenarios)}")
    rows = []
    for rep in reports:
        row = {"agent": rep["agent"], "scenario": rep["scenario"],
               "completion_rate": rep["aggregate"]["completion_rate"]}
        for metric in _GAIN_METRICS:
            value = rep["aggregate"][metric]
            base_value = base["aggregate"][metric]
            row[metric] = value
            if base_value != 0:
                row[f"{metric}_gain_pct"] = \
                    (value - base_value) / base_value * 100.0
            else:
                row[f"{metric}_gain_pct"] = 0.0 if value == base_value \
                    else float("inf")
        rows.append(row)
    return rows, warnings


def write_comparison_csv(path, rows) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([row[c] if isinstance(row[c], (int, str))
                             else repr(float(row[c])) for c in cols])


def read_comparison_csv(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = {}
            for key, text in raw.items():
                if key in ("agent",):
                    row[key] = text
                elif key == "scenario":
                    try:
                        row[key] = int(text)
                    except ValueError:
                        row[key] = text
                else:
                    row[key] = float(text)
            rows.append(row)
        return rows
