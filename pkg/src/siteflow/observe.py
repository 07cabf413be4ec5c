"""Observation assembly, running normalization, and action (de)normalization.

The 59-slot observation layout is a compatibility contract: checkpoints store
normalization statistics per slot, so the ordering below must not change.

====  =========================================================
slot  content
====  =========================================================
0     day index
1-3   completed area per trade
4     holding cash
5     last realized daily inflow
6     wages accrued since the last payday
7-9   material stock
10    formwork in use
11-13 today's material prices
14-16 today's (temp, rain, wind)
17-22 (temp, rain, wind) for days t-2 and t-1
23-31 work hours for days t-3, t-2, t-1 (3 trades each)
32-34 cash-inflow forecast for days t+1..t+3
35-43 (temp, rain, wind) forecast for days t+1..t+3
44-58 price forecast for days t+1..t+5 (3 materials each)
====  =========================================================

Fatigue and the weather-efficiency coefficient are deliberately absent: the
controller cannot observe them.  History slots before day 1 are padded with
day-1 values, work-hour history with the 8-hour norm.

Slots 0-16 describe today's directly relevant situation and feed the network
trunk directly; slots 17-58 (histories and forecasts) pass through the
feature-extraction branch first.
"""

from __future__ import annotations

import numpy as np

from .env import Action, State
from .exogenous import (forecast_cash_inflow, forecast_price,
                        forecast_weather)

OBS_DIM = 59
ACTION_DIM = 6
DIRECT_SLOTS = slice(0, 17)
INDIRECT_SLOTS = slice(17, 59)
N_DIRECT = 17
N_INDIRECT = 42


def assemble_observation(state: State, cash_fc, weather_fc, price_fc)\
        -> np.ndarray:
    """Pure assembly of the observation vector from state plus forecasts."""
    temp_fc, rain_fc, wind_fc = weather_fc
    obs = np.empty(OBS_DIM)
    obs[0] = state.day
    obs[1:4] = state.done_area
    obs[4] = state.cash
    obs[5] = state.inflow
    obs[6] = state.wage_accrual
    obs[7:10] = state.stock
    obs[10] = state.forms_in_use
    obs[11:14] = state.prices
    obs[14] = state.temp
    obs[15] = state.rain
    obs[16] = state.wind
    obs[17:23] = state.weather_hist.ravel()
    obs[23:32] = state.hours_hist.ravel()
    obs[32:35] = cash_fc
    fc = np.empty((3, 3))
    fc[:, 0] = temp_fc
    fc[:, 1] = rain_fc
    fc[:, 2] = wind_fc
    obs[35:44] = fc.ravel()
    obs[44:59] = price_fc.ravel()
    return obs


def build_observation(state: State, curves, params, rng) -> np.ndarray:
    """Observation for the current day, drawing fresh forecast noise."""
    abs_day = params.start_day + state.day - 1
    weather_fc = forecast_weather(curves, abs_day, params.climate, rng)
    price_fc = forecast_price(curves, abs_day, params.climate, rng)
    cash_fc = forecast_cash_inflow(state, params)
    return assemble_observation(state, cash_fc, weather_fc, price_fc)


class NormStats:
    """Streaming per-slot mean/std for observations (Welford update).

    Normalized values are clipped to +-CLIP so the few steps collected while
    the statistics are still immature cannot blow up the value estimates.
    """

    STD_FLOOR = 1e-8
    CLIP = 10.0

    def __init__(self, dim: int = OBS_DIM):
        self.count = 0
        self.mean = np.zeros(dim)
        self._m2 = np.zeros(dim)

    def update(self, obs: np.ndarray) -> None:
        self.count += 1
        delta = obs - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (obs - self.mean)

    @property
    def std(self) -> np.ndarray:
        if self.count == 0:
            return np.ones_like(self.mean)
        return np.maximum(np.sqrt(self._m2 / self.count), self.STD_FLOOR)

    def normalize(self, obs: np.ndarray) -> np.ndarray:
        if self.count == 0:
            return np.clip(obs, -self.CLIP, self.CLIP)
        return np.clip((obs - self.mean) / self.std, -self.CLIP, self.CLIP)

    def to_arrays(self) -> dict:
        return {"count": np.array([float(self.count)]),
                "mean": self.mean.copy(), "m2": self._m2.copy()}

    @classmethod
    def from_arrays(cls, arrays: dict) -> "NormStats":
        stats = cls(dim=arrays["mean"].shape[0])
        stats.count = int(arrays["count"][0])
        stats.mean = arrays["mean"].copy()
        stats._m2 = arrays["m2"].copy()
        return stats


def action_mid_half(params):
    """Fixed midpoints and half-ranges of the 6 action dimensions."""
    mid = np.empty(ACTION_DIM)
    half = np.empty(ACTION_DIM)
    mid[:3] = 0.5 * (params.min_work_hours + params.max_work_hours)
    half[:3] = 0.5 * (params.max_work_hours - params.min_work_hours)
    mid[3:] = 0.5 * params.max_order_arr
    half[3:] = 0.5 * params.max_order_arr
    return mid, half


def denormalize_action(a, params) -> Action:
    """Map a unit-scaled 6-vector into a valid engineering action.

    Any real input is accepted: values are clamped to the bounds, work hours
    then snap to half-hour steps and orders to whole units.
    """
    a = np.asarray(a, dtype=float)
    mid, half = action_mid_half(params)
    raw = mid + a * half
    hours = np.clip(raw[:3], params.min_work_hours, params.max_work_hours)
    hours = np.round(hours * 2.0) / 2.0
    orders = np.clip(raw[3:], 0.0, params.max_order_arr)
    orders = np.rint(orders)
    return Action(hours=hours, orders=orders)


def normalize_action(action: Action, params) -> np.ndarray:
    mid, half = action_mid_half(params)
    eng = np.concatenate([action.hours, action.orders])
    return (eng - mid) / half
