"""Simulator state and the one-day transition.

Each simulated day applies, in order: labor update (fatigue, weather
efficiency, attendance), work update (per-trade progress limited by whichever
of the labor, material, or precedence flow is critical), material update
(consumption, formwork removal/recycling, deliveries, storage overflow), and
cash update (interest, milestone payments, orders, weekly wages).  The day
counter then advances and the next day's weather and prices are read from the
sampled annual curves.

Units and conventions:

* trades/materials are indexed 0=rebar, 1=formwork, 2=concrete everywhere;
* rebar orders and stock are counted in 0.1-ton units while its market quote
  is CNY/ton, so purchases apply the price times ``PRICE_UNIT_RATIO``;
* ordered material arrives the next morning; concrete left over at the end
  of a day is discarded; formwork moves from stock into use and is removed
  (and mostly recycled) when the zones it covers are poured;
* workers are paid every 7 days for the previous week, with a final
  settlement of accrued wages on the completion day;
* a milestone payment is applied for when a floor completes and lands a
  uniform 2-4 days later.

``step`` is a pure function of ``(state, action, curves, params, rng)``;
states are plain values, so independent simulations can run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .scenario import ModelParams
from .exogenous import AnnualCurves

REBAR, FORMWORK, CONCRETE = 0, 1, 2

# order units per price-quote unit: rebar is ordered in 0.1-ton lots but
# quoted per ton; formwork and concrete order units match their quotes
PRICE_UNIT_RATIO = np.array([0.1, 1.0, 1.0])

_AREA_EPS = 1e-6


class StepStatus(Enum):
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED_COST = "failed_cost"
    FAILED_TIME = "failed_time"


@dataclass(frozen=True)
class Action:
    hours: np.ndarray   # (3,) work hours per trade
    orders: np.ndarray  # (3,) order quantities per material


def validate_action(action: Action, params: ModelParams) -> None:
    h, b = np.asarray(action.hours), np.asarray(action.orders)
    if h.shape != (3,) or b.shape != (3,):
        raise ValueError("action needs 3 work-hour and 3 order values")
    if np.any(h < params.min_work_hours - 1e-9) or \
            np.any(h > params.max_work_hours + 1e-9):
        raise ValueError(f"work hours out of bounds: {h}")
    if np.any(b < -1e-9) or np.any(b > params.max_order_arr + 1e-9):
        raise ValueError(f"orders out of bounds: {b}")


@dataclass(frozen=True, slots=True)
class State:
    day: int
    done_area: np.ndarray    # (3,) cumulative completed area per trade
    cash: float
    inflow: float            # last realized daily inflow
    outflow: float           # last realized daily outflow
    wage_accrual: float      # wages owed since the last payday
    weather_eff: float
    fatigue: np.ndarray      # (3,)
    stock: np.ndarray        # (3,)
    forms_in_use: float
    prices: np.ndarray       # (3,) today's quotes
    temp: float
    rain: float
    wind: float
    pay_queue: tuple         # ((applied_day, landing_day, amount), ...)
    labor_cost: float        # cumulative wages paid
    material_cost: float     # cumulative orders + inventory fees paid
    hours_hist: np.ndarray   # (3, 3) work hours of the last 3 days
    weather_hist: np.ndarray  # (2, 3) (temp, rain, wind) of the last 2 days
    # cumulative ledgers, for conservation checks and reporting
    inflow_total: float
    outflow_total: float
    delivered: np.ndarray    # (3,) orders credited to stock
    consumed: np.ndarray     # (3,) taken from stock for work
    wasted: np.ndarray       # (3,) overflow + discards + recycling losses
    recycled: float          # formwork returned to stock after removal
    removed: float           # formwork taken out of use


def init_state(params: ModelParams, curves: AnnualCurves) -> State:
    if len(curves) < params.start_day:
        raise ValueError("curves do not cover the project start day")
    i = params.start_day - 1
    today = np.array([curves.temp[i], curves.rain[i], curves.wind[i]])
    return State(
        day=1,
        done_area=np.zeros(3),
        cash=float(params.init_cash),
        inflow=0.0,
        outflow=0.0,
        wage_accrual=0.0,
        weather_eff=1.0,
        fatigue=np.zeros(3),
        stock=np.zeros(3),
        forms_in_use=0.0,
        prices=curves.prices[i].copy(),
        temp=float(today[0]),
        rain=float(today[1]),
        wind=float(today[2]),
        pay_queue=(),
        labor_cost=0.0,
        material_cost=0.0,
        hours_hist=np.full((3, 3), 8.0),
        weather_hist=np.vstack([today, today]),
        inflow_total=0.0,
        outflow_total=0.0,
        delivered=np.zeros(3),
        consumed=np.zeros(3),
        wasted=np.zeros(3),
        recycled=0.0,
        removed=0.0,
    )


def discount_ratio(qty, discount_qty, min_discount):
    """Bulk-purchase discount: linear from 1 at zero down to the floor."""
    qty = np.asarray(qty, dtype=float)
    ratio = np.where(qty <= discount_qty,
                     1.0 - qty / discount_qty * (1.0 - min_discount),
                     min_discount)
    return ratio if ratio.ndim else float(ratio)


def daily_wage(attendance, wage_rate, overtime_premium, hours):
    """One trade's wage bill for a day; hours past 8 earn the premium."""
    paid_hours = hours + overtime_premium * max(0.0, hours - 8.0)
    return attendance * wage_rate * paid_hours


class LaborDay(NamedTuple):
    fatigue: np.ndarray
    fatigue_eff: np.ndarray
    weather_eff: float
    attendance: np.ndarray


def labor_update(state: State, hours, params: ModelParams) -> LaborDay:
    """Today's fatigue, weather efficiency, and expected attendance."""
    fatigue = np.maximum(0.0, 0.5 * state.fatigue + hours - 8.0)
    fatigue_eff = params.fatigue_eff(fatigue)
    weather_eff = min(1.0,
                      state.weather_eff + 0.3,
                      params.temp_eff(state.temp),
                      params.rain_eff(state.rain),
                      params.wind_eff(state.wind))
    absence = np.minimum(
        1.0, params.base_absence * (1.0 + params.absence_fatigue_slope * fatigue))
    attendance = params.workers_arr * (1.0 - absence)
    return LaborDay(fatigue, fatigue_eff, weather_eff, attendance)


class WorkDay(NamedTuple):
    new_area: np.ndarray
    delta: np.ndarray
    max_material: np.ndarray


def work_update(state: State, labor: LaborDay, hours, params: ModelParams,
                rng) -> WorkDay:
    """Per-trade progress: the minimum over labor, material, and precedence.

    Formwork can go up only on zones fully caged as of this morning, concrete
    only on zones fully formed, and rebar at most one floor's worth of zones
    ahead of the poured front.
    """
    eff_hours = params.effective_hours(hours)
    noise_w = 1.0 + rng.uniform(-0.05, 0.05, 3)
    max_work = (noise_w * labor.fatigue_eff * labor.weather_eff
                * params.area_per_worker_hour_arr * labor.attendance * eff_hours)

    noise_m = 1.0 + rng.uniform(-0.05, 0.05, 3)
    max_material = noise_m * params.area_per_unit_arr * state.stock

    za = params.zone_area
    rb, fw, cc = state.done_area
    max_prec = np.array([
        (math.floor(cc / za) + params.zones_per_floor) * za - rb,
        math.floor(rb / za) * za - fw,
        math.floor(fw / za) * za - cc,
    ])

    total = params.total_area
    delta = np.minimum(np.minimum(max_work, max_material),
                       np.minimum(max_prec, total - state.done_area))
    delta = np.maximum(delta, 0.0)
    new_area = state.done_area + delta
    # snap to the building total so completion checks are exact
    new_area[new_area > total - _AREA_EPS] = total
    return WorkDay(new_area, delta, max_material)


class MaterialDay(NamedTuple):
    stock: np.ndarray
    forms_in_use: float
    consumed: np.ndarray
    removed: float
    recycled: float
    waste: np.ndarray


def material_update(state: State, work: WorkDay, orders, params: ModelParams,
                    rng) -> MaterialDay:
    """Consumption, formwork removal/recycling, deliveries, and waste."""
    noise_c = 1.0 + rng.uniform(-0.05, 0.05, 3)
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(work.max_material > 0,
                        work.delta / work.max_material, 0.0)
    consumed = np.minimum(noise_c * frac * state.stock, state.stock)

    # formwork comes off the zones whose pour completed today, in proportion
    # to the share of not-yet-poured formed area they represent
    za = params.zone_area
    poured_before = math.floor(state.done_area[CONCRETE] / za) * za
    poured_after = math.floor(work.new_area[CONCRETE] / za) * za
    exposed = state.done_area[FORMWORK] - poured_before
    if exposed > _AREA_EPS and poured_after > poured_before:
        removed = min(state.forms_in_use,
                      (poured_after - poured_before) / exposed
                      * state.forms_in_use)
    else:
        removed = 0.0
    noise_r = 1.0 + rng.uniform(-0.1, 0.1)
    recycled = max(0.0, (1.0 - noise_r * params.recycle_loss) * removed)
    forms_in_use = state.forms_in_use + consumed[FORMWORK] - removed

    stock = np.empty(3)
    waste = np.zeros(3)
    rb_in = state.stock[REBAR] - consumed[REBAR] + orders[REBAR]
    stock[REBAR] = min(params.storage_cap[0], rb_in)
    waste[REBAR] = rb_in - stock[REBAR]
    fw_in = state.stock[FORMWORK] - consumed[FORMWORK] + recycled \
        + orders[FORMWORK]
    stock[FORMWORK] = min(params.storage_cap[1], fw_in)
    waste[FORMWORK] = (fw_in - stock[FORMWORK]) + (removed - recycled)
    # unconsumed concrete spoils; today's order is tomorrow's stock
    waste[CONCRETE] = state.stock[CONCRETE] - consumed[CONCRETE]
    stock[CONCRETE] = orders[CONCRETE]
    return MaterialDay(stock, forms_in_use, consumed, removed, recycled, waste)


class CashDay(NamedTuple):
    inflow: float
    outflow: float
    cash: float
    wage_accrual: float
    pay_queue: tuple
    wages_paid: float
    material_paid: float


def cash_update(state: State, work: WorkDay, labor: LaborDay, hours, orders,
                params: ModelParams, rng) -> CashDay:
    """Interest and milestone inflows; order, fee, and wage outflows.

    Wages accrue daily and are paid every 7th day for the week before; the
    open week is settled on the completion day.  Each floor completed today
    applies for a milestone payment landing 2-4 days from now.
    """
    day = state.day
    inflow = params.interest_rate * state.cash
    queue = [q for q in state.pay_queue if q[1] != day]
    inflow += sum(q[2] for q in state.pay_queue if q[1] == day)

    floors_before = math.floor(state.done_area[CONCRETE] / params.floor_area
                               + _AREA_EPS)
    floors_after = math.floor(work.new_area[CONCRETE] / params.floor_area
                              + _AREA_EPS)
    for _ in range(floors_after - floors_before):
        lead = int(rng.integers(2, 5))
        queue.append((day, day + lead, params.floor_payment))

    discount = discount_ratio(orders, params.discount_qty_arr,
                              params.min_discount)
    order_pay = float(np.sum(discount * state.prices * PRICE_UNIT_RATIO
                             * orders))
    paid_hours = hours + params.overtime_premium * np.maximum(0.0, hours - 8.0)
    wages_today = float(np.sum(labor.attendance * params.wage_arr * paid_hours))

    wages_paid = 0.0
    accrual = state.wage_accrual
    if day % 7 == 1:
        wages_paid += accrual
        accrual = 0.0
    accrual += wages_today
    if work.new_area[CONCRETE] >= params.total_area:  # settle on handover
        wages_paid += accrual
        accrual = 0.0
    material_paid = params.inventory_fee + order_pay
    outflow = material_paid + wages_paid
    cash = state.cash + inflow - outflow
    return CashDay(inflow, outflow, cash, accrual, tuple(queue), wages_paid,
                   material_paid)


def step(state: State, action: Action, curves: AnnualCurves,
         params: ModelParams, rng) -> tuple[State, StepStatus]:
    """Advance the simulation by one day."""
    validate_action(action, params)
    hours = np.asarray(action.hours, dtype=float)
    orders = np.asarray(action.orders, dtype=float)
    day = state.day

    labor = labor_update(state, hours, params)
    work = work_update(state, labor, hours, params, rng)
    material = material_update(state, work, orders, params, rng)
    cash = cash_update(state, work, labor, hours, orders, params, rng)

    # --- advance to tomorrow ---
    new_day = day + 1
    i = params.start_day + new_day - 2
    today = np.array([state.temp, state.rain, state.wind])

    new_state = State(
        day=new_day,
        done_area=work.new_area,
        cash=cash.cash,
        inflow=cash.inflow,
        outflow=cash.outflow,
        wage_accrual=cash.wage_accrual,
        weather_eff=labor.weather_eff,
        fatigue=labor.fatigue,
        stock=material.stock,
        forms_in_use=material.forms_in_use,
        prices=curves.prices[i].copy(),
        temp=float(curves.temp[i]),
        rain=float(curves.rain[i]),
        wind=float(curves.wind[i]),
        pay_queue=cash.pay_queue,
        labor_cost=state.labor_cost + cash.wages_paid,
        material_cost=state.material_cost + cash.material_paid,
        hours_hist=np.vstack([state.hours_hist[1:], hours]),
        weather_hist=np.vstack([state.weather_hist[1:], today]),
        inflow_total=state.inflow_total + cash.inflow,
        outflow_total=state.outflow_total + cash.outflow,
        delivered=state.delivered + orders,
        consumed=state.consumed + material.consumed,
        wasted=state.wasted + material.waste,
        recycled=state.recycled + material.recycled,
        removed=state.removed + material.removed,
    )
    return new_state, status(new_state, params)


def status(state: State, params: ModelParams) -> StepStatus:
    """Episode status of a state reached after a step.

    The cash test compares the new holding cash against the inflow just
    received, which equals checking that yesterday's opening cash covered
    yesterday's outflow.
    """
    if state.done_area[CONCRETE] >= params.total_area:
        return StepStatus.COMPLETED
    if state.day >= params.max_days:
        return StepStatus.FAILED_TIME
    if state.cash < state.inflow:
        return StepStatus.FAILED_COST
    return StepStatus.RUNNING
