"""Annual weather and material-price processes, plus noisy forecasts.

Curves are sampled once per simulated project: rainy days are drawn from
per-month precipitation probabilities, rainfall amounts are scaled so the
expected monthly totals match the monthly baseline, temperature/wind are
smooth seasonal curves perturbed around rainy days, and prices follow
``base * (1 + inflation * day/365) * (1 + amplitude * cos(...))`` with white
noise on top.

Forecast helpers mimic imperfect real-world predictions: noise grows with
the horizon, and temperature/wind forecast errors scale with the rainfall
forecast error of the same day.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np

MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
_MONTH_EDGES = np.cumsum((0,) + MONTH_DAYS)  # day-of-year boundaries


@dataclass(frozen=True)
class BaselineParams:
    """Climate and market baselines; all values are user-overridable."""

    # per material: rebar (CNY/ton), formwork (CNY/m^2), concrete (CNY/m^3)
    price_base: tuple = (3000.0, 20.0, 480.0)
    price_inflation: tuple = (0.30, 0.05, 0.10)   # fraction per 365 days
    price_amplitude: tuple = (0.05, 0.05, 0.0)
    # phase anchors of the periodic terms; under the default inflation these
    # put the realized rebar/formwork peaks near mid-September and mid-April
    price_phase_day: tuple = (201.0, 95.0, 0.0)
    price_noise: float = 0.005                    # relative white-noise std

    temp_mean: float = 12.0                       # deg C
    temp_amplitude: float = 15.0
    temp_peak_day: float = 205.0
    wind_mean: float = 3.0                        # m/s
    wind_amplitude: float = 1.5
    wind_peak_day: float = 100.0
    rain_prob_month: tuple = (0.05, 0.05, 0.10, 0.15, 0.20, 0.35,
                              0.45, 0.40, 0.25, 0.15, 0.08, 0.05)
    rain_total_month: tuple = (3.0, 6.0, 9.0, 25.0, 30.0, 70.0,
                               170.0, 160.0, 50.0, 30.0, 10.0, 3.0)

    # rainy-day adjustments: warmer/calmer the day before, the reverse on the
    # day itself, proportional to the rainfall amount
    rain_temp_shift: float = 0.2                  # deg C per mm
    rain_temp_cap: float = 5.0
    rain_wind_shift: float = 0.1                  # m/s per mm
    rain_wind_cap: float = 3.0

    # forecast error scales by horizon
    rain_forecast_noise: tuple = (0.2, 0.35, 0.5)
    temp_forecast_coef: float = 0.3               # deg C per mm of rain error
    wind_forecast_coef: float = 0.15
    price_forecast_noise: tuple = (0.005, 0.010, 0.015, 0.020, 0.025)

    @cached_property
    def _prob(self):
        return np.asarray(self.rain_prob_month, dtype=float)

    @cached_property
    def _total(self):
        return np.asarray(self.rain_total_month, dtype=float)


def validate_baseline(base: BaselineParams) -> list[str]:
    bad = []
    for name in ("price_base", "price_inflation", "price_amplitude",
                 "price_phase_day"):
        if len(getattr(base, name)) != 3:
            bad.append(f"climate.{name}: needs one value per material")
    if any(v <= 0 for v in base.price_base):
        bad.append("climate.price_base: must be > 0")
    if base.price_noise < 0:
        bad.append("climate.price_noise: must be >= 0")
    if len(base.rain_prob_month) != 12 or len(base.rain_total_month) != 12:
        bad.append("climate.rain_prob_month/rain_total_month: need 12 values")
    elif not all(0 <= p <= 1 for p in base.rain_prob_month):
        bad.append("climate.rain_prob_month: must be in [0, 1]")
    if any(v < 0 for v in base.rain_total_month):
        bad.append("climate.rain_total_month: must be >= 0")
    if len(base.rain_forecast_noise) != 3:
        bad.append("climate.rain_forecast_noise: needs 3 horizon values")
    elif any(v < 0 for v in base.rain_forecast_noise) or any(
            b < a for a, b in zip(base.rain_forecast_noise,
                                  base.rain_forecast_noise[1:])):
        bad.append("climate.rain_forecast_noise: must be >= 0 and non-decreasing")
    if len(base.price_forecast_noise) != 5:
        bad.append("climate.price_forecast_noise: needs 5 horizon values")
    elif any(v < 0 for v in base.price_forecast_noise) or any(
            b <= a for a, b in zip(base.price_forecast_noise,
                                   base.price_forecast_noise[1:])):
        bad.append("climate.price_forecast_noise: must be >= 0 and increasing")
    for name in ("temp_forecast_coef", "wind_forecast_coef", "rain_temp_shift",
                 "rain_wind_shift", "rain_temp_cap", "rain_wind_cap"):
        if getattr(base, name) < 0:
            bad.append(f"climate.{name}: must be >= 0")
    return bad


@dataclass(frozen=True)
class AnnualCurves:
    """Day-indexed exogenous series; index day ``d`` as ``array[d - 1]``."""

    temp: np.ndarray    # (n,) deg C
    rain: np.ndarray    # (n,) mm
    wind: np.ndarray    # (n,) m/s
    prices: np.ndarray  # (n, 3) natural quotes: CNY/ton, CNY/m^2, CNY/m^3

    def __len__(self) -> int:
        return self.temp.shape[0]


def month_of_day(cal_day):
    """Month index (0-11) for a day of a 365-day calendar year."""
    return np.searchsorted(_MONTH_EDGES, cal_day, side="right") - 1


def sample_year(base: BaselineParams, num_days: int, rng) -> AnnualCurves:
    """Sample exogenous curves for absolute days 1..num_days.

    The calendar wraps modulo 365 while price inflation keeps accruing
    linearly with the absolute day index.
    """
    days = np.arange(1, num_days + 1, dtype=float)
    cal = (days - 1) % 365 + 1
    month = month_of_day(cal)

    prob = base._prob[month]
    rainy = rng.random(num_days) < prob
    mdays = np.asarray(MONTH_DAYS, dtype=float)[month]
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_rain = np.where(prob > 0, base._total[month] / (prob * mdays), 0.0)
    rain = np.where(rainy, rng.exponential(1.0, num_days) * mean_rain, 0.0)

    temp = base.temp_mean + base.temp_amplitude * np.cos(
        2 * np.pi * (cal - base.temp_peak_day) / 365)
    wind = base.wind_mean + base.wind_amplitude * np.cos(
        2 * np.pi * (cal - base.wind_peak_day) / 365)
    rain_next = np.append(rain[1:], 0.0)
    temp_up = np.minimum(base.rain_temp_shift * rain_next, base.rain_temp_cap)
    temp_down = np.minimum(base.rain_temp_shift * rain, base.rain_temp_cap)
    wind_down = np.minimum(base.rain_wind_shift * rain_next, base.rain_wind_cap)
    wind_up = np.minimum(base.rain_wind_shift * rain, base.rain_wind_cap)
    temp = temp + temp_up - temp_down
    wind = np.maximum(0.0, wind - wind_down + wind_up)

    prices = np.empty((num_days, 3))
    for m in range(3):
        trend = base.price_base[m] * (1 + base.price_inflation[m] * days / 365)
        periodic = 1 + base.price_amplitude[m] * np.cos(
            2 * np.pi * (cal - base.price_phase_day[m]) / 365)
        noise = 1 + base.price_noise * rng.standard_normal(num_days)
        prices[:, m] = np.maximum(trend * periodic * noise,
                                  0.01 * base.price_base[m])
    return AnnualCurves(temp=temp, rain=rain, wind=wind, prices=prices)


def sample_project_curves(params, rng) -> AnnualCurves:
    """Curves long enough for one project plus the forecast margin."""
    return sample_year(params.climate, params.start_day + params.max_days + 6,
                       rng)


def forecast_weather(curves: AnnualCurves, day: int, base: BaselineParams,
                     rng):
    """Three-day (temp, rain, wind) forecasts issued at the end of `day`."""
    if day + 3 > len(curves):
        raise ValueError(f"weather forecast horizon beyond curve range at day {day}")
    sl = slice(day, day + 3)  # absolute days day+1 .. day+3
    rain_true = curves.rain[sl]
    scales = np.asarray(base.rain_forecast_noise)
    rain_fc = np.maximum(
        0.0, rain_true * (1 + scales * rng.standard_normal(3)))
    rain_err = np.abs(rain_fc - rain_true)
    temp_fc = curves.temp[sl] + base.temp_forecast_coef * rain_err \
        * rng.standard_normal(3)
    wind_fc = np.maximum(
        0.0, curves.wind[sl] + base.wind_forecast_coef * rain_err
        * rng.standard_normal(3))
    return temp_fc, rain_fc, wind_fc


def forecast_price(curves: AnnualCurves, day: int, base: BaselineParams,
                   rng) -> np.ndarray:
    """Five-day price forecast, shape (5, 3); noise grows with the horizon."""
    if day + 5 > len(curves):
        raise ValueError(f"price forecast horizon beyond curve range at day {day}")
    truth = curves.prices[day:day + 5]
    scales = np.asarray(base.price_forecast_noise)[:, None]
    fc = truth * (1 + scales * rng.standard_normal((5, 3)))
    return np.maximum(fc, 0.5 * truth)


def forecast_cash_inflow(state, params) -> np.ndarray:
    """Predicted cash inflow for the next 3 days.

    Daily interest on today's holding cash, plus the milestone amount on any
    day a pending payment is expected to land.  Pending payments are assumed
    to land 3 days after their application (the middle of the 2-4 day lead
    time), never earlier than tomorrow.
    """
    fc = np.full(3, params.interest_rate * state.cash)
    for applied, _land, amount in state.pay_queue:
        predicted = max(applied + 3, state.day + 1)
        offset = predicted - state.day - 1
        if 0 <= offset < 3:
            fc[offset] += amount
    return fc


def write_curves_csv(path, curves: AnnualCurves) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["day", "temp", "rain", "wind",
                         "price_rebar", "price_formwork", "price_concrete"])
        for i in range(len(curves)):
            writer.writerow([i + 1, repr(curves.temp[i]), repr(curves.rain[i]),
                             repr(curves.wind[i]),
                             repr(curves.prices[i, 0]),
                             repr(curves.prices[i, 1]),
                             repr(curves.prices[i, 2])])
