"""Model parameters, built-in benchmark scenarios, and config file loading.

A :class:`ModelParams` instance holds every constant that drives one simulated
project: geometry (floors, zones, areas), cash terms (start-up cash, milestone
payment, wages, discounts), crew sizes, storage limits, productivity rates, the
piecewise productivity curves, and the climate/market baselines used by the
exogenous process generator.  Instances are frozen; they can be shared freely
across concurrent simulations.

Seven built-in scenarios (ids 0-6) cover a reference residential project plus
harsher budget / weather / market conditions and three project-setup variants.
Custom setups are written as flat ``key = value`` config files (see
:func:`read_config_overrides` for the grammar).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields, replace
from functools import cached_property

import numpy as np

from .exogenous import BaselineParams, validate_baseline

TRADES = ("rebar", "formwork", "concrete")


class ScenarioError(ValueError):
    """Raised for unknown scenario ids or invalid parameter overrides."""


@dataclass(frozen=True)
class ModelParams:
    # project geometry and horizon
    floors: int = 25
    zones_per_floor: int = 12
    zone_area: float = 50.0          # m^2 per construction zone
    max_days: int = 150
    start_day: int = 151             # calendar day (1-365) of project day 1

    # cash flow
    init_cash: float = 1_000_000.0
    floor_payment: float = 400_000.0
    interest_rate: float = 1e-4      # daily, on holding cash
    hourly_wage: tuple = (27.5, 27.5, 22.5)
    overtime_premium: float = 2.0    # extra wage ratio for hours past 8
    inventory_fee: float = 1_000.0   # flat daily storage-management fee
    discount_qty: tuple = (400.0, 800.0, 150.0)   # order size for full discount
    min_discount: float = 0.9

    # labor flow
    workers: tuple = (12, 20, 8)
    base_absence: float = 0.05

    # material flow; storage caps apply to rebar and formwork only,
    # concrete is capped by its daily order bound instead
    storage_cap: tuple = (500.0, 2000.0)
    recycle_loss: float = 0.05

    # work flow
    area_per_worker_hour: tuple = (2.5, 1.51, 3.84)  # m^2 per worker-hour
    area_per_unit: tuple = (1.54, 0.25, 3.0)         # m^2 per material unit

    # action bounds
    min_work_hours: float = 4.0
    max_work_hours: float = 12.0
    max_order: tuple = (500.0, 2000.0, 300.0)

    # productivity curves: (breakpoints, values) pairs, linearly interpolated
    # with clamped extrapolation
    fatigue_eff_curve: tuple = ((0.0, 2.0, 4.0, 6.0, 8.0),
                                (1.0, 0.95, 0.85, 0.7, 0.4))
    temp_eff_curve: tuple = ((0.0, 10.0, 20.0, 30.0, 40.0, 50.0),
                             (0.0, 0.5, 1.0, 1.0, 0.5, 0.0))
    rain_eff_curve: tuple = ((2.0, 10.0, 20.0, 50.0),
                             (1.0, 0.8, 0.5, 0.0))
    wind_eff_curve: tuple = ((5.0, 10.0, 20.0),
                             (1.0, 0.7, 0.0))

    # per-hour effectiveness of the i-th work hour of a day
    hour_eff: tuple = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
                       0.9, 0.8, 0.7, 0.6)
    # absence ratio grows linearly with the fatigue index
    absence_fatigue_slope: float = 0.25

    # approximate shares of labor/material in the total cost, used by the
    # cash-related reward terms
    labor_cost_share: float = 0.1
    material_cost_share: float = 0.9

    # weather and market process baselines
    climate: BaselineParams = field(default_factory=BaselineParams)

    @property
    def floor_area(self) -> float:
        return self.zones_per_floor * self.zone_area

    @property
    def total_area(self) -> float:
        return self.floors * self.floor_area

    # cached numpy views of the tuple fields, for the simulation hot path
    @cached_property
    def workers_arr(self):
        return np.asarray(self.workers, dtype=float)

    @cached_property
    def wage_arr(self):
        return np.asarray(self.hourly_wage, dtype=float)

    @cached_property
    def area_per_worker_hour_arr(self):
        return np.asarray(self.area_per_worker_hour, dtype=float)

    @cached_property
    def area_per_unit_arr(self):
        return np.asarray(self.area_per_unit, dtype=float)

    @cached_property
    def discount_qty_arr(self):
        return np.asarray(self.discount_qty, dtype=float)

    @cached_property
    def max_order_arr(self):
        return np.asarray(self.max_order, dtype=float)

    @cached_property
    def storage_cap_arr(self):
        return np.asarray(self.storage_cap, dtype=float)

    @cached_property
    def _fatigue_xy(self):
        x, y = self.fatigue_eff_curve
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    @cached_property
    def _temp_xy(self):
        x, y = self.temp_eff_curve
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    @cached_property
    def _rain_xy(self):
        x, y = self.rain_eff_curve
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    @cached_property
    def _wind_xy(self):
        x, y = self.wind_eff_curve
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)

    @cached_property
    def _hour_eff_cum(self):
        # cumulative effective hours at integer hour marks 0..len(hour_eff)
        grid = np.arange(len(self.hour_eff) + 1, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.hour_eff)])
        return grid, cum

    def fatigue_eff(self, fatigue):
        return np.interp(fatigue, *self._fatigue_xy)

    def temp_eff(self, temp: float) -> float:
        return float(np.interp(temp, *self._temp_xy))

    def rain_eff(self, rain: float) -> float:
        return float(np.interp(rain, *self._rain_xy))

    def wind_eff(self, wind: float) -> float:
        return float(np.interp(wind, *self._wind_xy))

    def effective_hours(self, hours):
        """Cumulative effective work time for a (possibly fractional) shift."""
        return np.interp(hours, *self._hour_eff_cum)


@dataclass(frozen=True)
class ScenarioSpec:
    """A built-in scenario id (0-6 or its name) plus sparse field overrides."""
    id: int | str = 0
    overrides: dict = field(default_factory=dict)


# scenario 0 is the ModelParams default; the rest are sparse edits on top
SCENARIO_NAMES = {
    0: "common-conditions",
    1: "harsh-budget",
    2: "harsh-weather",
    3: "harsh-market",
    4: "more-floors",
    5: "larger-floors",
    6: "unbalanced-crews",
}

SCENARIO_OVERRIDES = {
    0: {},
    1: {"init_cash": 900_000.0},
    # winter start; crews enlarged by 65% (rounded to whole workers)
    2: {"start_day": 32, "workers": (20, 33, 13)},
    3: {"min_discount": 1.0},
    4: {"floors": 30, "max_days": 180},
    5: {"zones_per_floor": 15, "floor_payment": 500_000.0,
        "workers": (15, 25, 10)},
    6: {"workers": (16, 16, 9)},
}

_NAME_TO_ID = {name: sid for sid, name in SCENARIO_NAMES.items()}


def _tuplify(value):
    if isinstance(value, (list, tuple)):
        return tuple(_tuplify(v) for v in value)
    return value


def _apply_overrides(params: ModelParams, overrides: dict) -> ModelParams:
    plain = {}
    climate_over = {}
    climate_fields = {f.name for f in fields(BaselineParams)}
    model_fields = {f.name for f in fields(ModelParams)}
    for key, value in overrides.items():
        if key.startswith("climate."):
            sub = key.split(".", 1)[1]
            if sub not in climate_fields:
                raise ScenarioError(f"unknown climate parameter: {sub}")
            climate_over[sub] = _tuplify(value)
        elif key in climate_fields and key not in model_fields:
            climate_over[key] = _tuplify(value)
        elif key in model_fields:
            plain[key] = _tuplify(value)
        else:
            raise ScenarioError(f"unknown parameter: {key}")
    if climate_over:
        plain["climate"] = replace(params.climate, **climate_over)
    return replace(params, **plain)


def validate(params: ModelParams) -> list[str]:
    """Check every invariant; returns one message per violation (empty = ok)."""
    bad = []
    if params.floors < 1:
        bad.append("floors: must be >= 1")
    if params.zones_per_floor < 1:
        bad.append("zones_per_floor: must be >= 1")
    if params.zone_area <= 0:
        bad.append("zone_area: must be > 0")
    if params.max_days < 1:
        bad.append("max_days: must be >= 1")
    if not 1 <= params.start_day <= 365:
        bad.append("start_day: must be in 1..365")
    for name in ("init_cash", "floor_payment", "interest_rate",
                 "inventory_fee", "overtime_premium"):
        if getattr(params, name) < 0:
            bad.append(f"{name}: must be >= 0")
    for name in ("hourly_wage", "discount_qty", "workers", "max_order",
                 "area_per_worker_hour", "area_per_unit"):
        vals = getattr(params, name)
        if len(vals) != 3:
            bad.append(f"{name}: needs one value per trade")
        elif any(v < 0 for v in vals):
            bad.append(f"{name}: must be >= 0")
    if len(params.storage_cap) != 2 or any(v < 0 for v in params.storage_cap):
        bad.append("storage_cap: needs two values >= 0 (rebar, formwork)")
    if not 0 < params.min_discount <= 1:
        bad.append("min_discount: must be in (0, 1]")
    if not 0 <= params.base_absence < 1:
        bad.append("base_absence: must be in [0, 1)")
    if not 0 <= params.recycle_loss < 1:
        bad.append("recycle_loss: must be in [0, 1)")
    if not 0 < params.min_work_hours <= params.max_work_hours:
        bad.append("min_work_hours/max_work_hours: need 0 < lo <= hi")

    monotone = {"fatigue_eff_curve": True, "temp_eff_curve": False,
                "rain_eff_curve": True, "wind_eff_curve": True}
    for name, decreasing in monotone.items():
        x, y = getattr(params, name)
        if len(x) != len(y) or len(x) < 2:
            bad.append(f"{name}: needs matching breakpoint/value lists")
            continue
        if any(b <= a for a, b in zip(x, x[1:])):
            bad.append(f"{name}: breakpoints must be strictly increasing")
        if decreasing and any(b > a for a, b in zip(y, y[1:])):
            bad.append(f"{name}: values must be non-increasing")

    he = params.hour_eff
    if len(he) < 8 or any(v != 1.0 for v in he[:8]):
        bad.append("hour_eff: the first 8 hours must have effectiveness 1")
    if any(b > a for a, b in zip(he[7:], he[8:])):
        bad.append("hour_eff: must be non-increasing past hour 8")
    if params.absence_fatigue_slope < 0:
        bad.append("absence_fatigue_slope: must be >= 0")
    if params.labor_cost_share < 0 or params.material_cost_share < 0:
        bad.append("labor_cost_share/material_cost_share: must be >= 0")
    if params.labor_cost_share + params.material_cost_share > 1 + 1e-12:
        bad.append("labor_cost_share + material_cost_share: must be <= 1")

    bad.extend(validate_baseline(params.climate))
    return bad


def load_scenario(spec: ScenarioSpec | int | str = 0) -> ModelParams:
    """Expand a scenario spec into a validated, fully populated ModelParams."""
    if not isinstance(spec, ScenarioSpec):
        spec = ScenarioSpec(id=spec)
    sid = spec.id
    if isinstance(sid, str):
        if sid in _NAME_TO_ID:
            sid = _NAME_TO_ID[sid]
        elif sid.isdigit():
            sid = int(sid)
    if sid not in SCENARIO_OVERRIDES:
        raise ScenarioError(f"unknown scenario id: {spec.id!r}")
    params = _apply_overrides(ModelParams(), SCENARIO_OVERRIDES[sid])
    if spec.overrides:
        params = _apply_overrides(params, spec.overrides)
    problems = validate(params)
    if problems:
        raise ScenarioError("invalid parameters: " + "; ".join(problems))
    return params


def read_config_overrides(path) -> dict:
    """Parse a flat ``key = value`` config file into an overrides dict.

    Grammar: one assignment per line; ``#`` starts a comment; values are
    Python literals (numbers, or bracketed lists/tuples for per-trade values
    and curves); nested climate fields are addressed as ``climate.<field>``.
    A ``scenario = <id>`` line selects the built-in base (default 0).
    """
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
            key, text = (part.strip() for part in line.split("=", 1))
            try:
                value = ast.literal_eval(text)
            except (ValueError, SyntaxError):
                if key in ("scenario",) and text in _NAME_TO_ID:
                    value = text
                else:
                    raise ScenarioError(
                        f"{path}:{lineno}: cannot parse value for {key}: {text!r}"
                    ) from None
            overrides[key] = value
    return overrides


def load_config(path) -> ModelParams:
    overrides = read_config_overrides(path)
    base = overrides.pop("scenario", 0)
    return load_scenario(ScenarioSpec(id=base, overrides=overrides))


def scenario_summary(sid: int) -> str:
    p = load_scenario(sid)
    return (f"#{sid} {SCENARIO_NAMES[sid]}: floors={p.floors} "
            f"zones={p.zones_per_floor}x{p.zone_area:g}m2 "
            f"max_days={p.max_days} start_day={p.start_day} "
            f"cash={p.init_cash:,.0f} floor_payment={p.floor_payment:,.0f} "
            f"workers={p.workers[0]}/{p.workers[1]}/{p.workers[2]} "
            f"min_discount={p.min_discount:g}")
