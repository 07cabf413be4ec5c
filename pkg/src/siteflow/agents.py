"""Decision policies: the empirical rule policy and the network agents.

The empirical policy is the static schedule a site manager would run: pace
every trade at one third of a floor per day, order rebar and concrete daily
to match that pace, and top the formwork stock up by half its storage cap
whenever it falls below the daily-need threshold.

Network agents come in five flavours:

* ``sfpn1`` / ``sfpn2`` - one network controls all 6 action dims (two reward
  presets);
* ``swpn`` - a network picks work hours, the empirical rule orders materials;
* ``smpn`` - the reverse;
* ``dpn``  - two independent networks, one per action half, trained on their
  own reward streams.

Each learned half is a :class:`~siteflow.neural.NetworkBundle` plus the
reward preset it trains against ("lane").  Actions are sampled in normalized
space from ``N(mean, exp(logstd))`` and denormalized; hybrid agents splice
the rule-based half in engineering units, so it is bit-identical to the
standalone empirical policy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .env import Action
from .neural import NetworkBundle, gaussian_logp, read_flat_arrays, \
    write_flat_arrays
from .observe import ACTION_DIM, NormStats, OBS_DIM, action_mid_half
from .reward import AGENT_WEIGHTS, RewardWeights

EMPIRICAL = "empirical"
SFPN1, SFPN2, SWPN, SMPN, DPN = "sfpn1", "sfpn2", "swpn", "smpn", "dpn"
AGENT_KINDS = (EMPIRICAL, SFPN1, SFPN2, SWPN, SMPN, DPN)
NETWORK_KINDS = AGENT_KINDS[1:]

_STOCK_FORMWORK_SLOT = 8  # observation slot carrying the formwork stock


def empirical_work_hours(params) -> np.ndarray:
    """Hours per trade to pace each activity at a third of a floor per day."""
    target = params.floor_area / 3.0
    rate = params.area_per_worker_hour_arr * params.workers_arr
    hours = np.ceil(target / rate) + 1.0
    return np.clip(hours, params.min_work_hours, params.max_work_hours)


def empirical_material_order(formwork_stock: float, params) -> np.ndarray:
    """Daily rebar/concrete orders matching consumption; formwork on demand.

    Formwork is recyclable, so it is only reordered (half the storage cap at
    a time) when the stock drops below one day's need.
    """
    per_day = np.ceil(params.floor_area / (3.0 * params.area_per_unit_arr)) + 1
    orders = per_day.copy()
    if formwork_stock < per_day[1]:
        orders[1] = 0.5 * params.storage_cap[1]
    else:
        orders[1] = 0.0
    return np.clip(orders, 0.0, params.max_order_arr)


@dataclass
class PolicyLane:
    """One learned network, the action slots it drives, and its reward."""
    bundle: NetworkBundle
    start: int
    stop: int
    weights_id: int

    @property
    def weights(self) -> RewardWeights:
        return AGENT_WEIGHTS[self.weights_id]


@dataclass
class Agent:
    kind: str
    lanes: tuple
    norm: NormStats | None

    @property
    def is_network(self) -> bool:
        return bool(self.lanes)


_LANE_LAYOUT = {
    SFPN1: ((0, 6, 1),),
    SFPN2: ((0, 6, 2),),
    SWPN: ((0, 3, 3),),
    SMPN: ((3, 6, 4),),
    DPN: ((0, 3, 3), (3, 6, 4)),
}


def create_agent(kind: str, params, seed: int = 0) -> Agent:
    if kind == EMPIRICAL:
        return Agent(kind=EMPIRICAL, lanes=(), norm=None)
    if kind not in _LANE_LAYOUT:
        raise ValueError(f"unknown agent kind: {kind!r}")
    rng = np.random.default_rng(seed)
    lanes = tuple(
        PolicyLane(NetworkBundle(stop - start, rng=rng), start, stop, wid)
        for start, stop, wid in _LANE_LAYOUT[kind])
    return Agent(kind=kind, lanes=lanes, norm=NormStats(OBS_DIM))


class LaneSample(NamedTuple):
    a: np.ndarray        # normalized action for this lane's slots
    value: float
    logp: float
    mean: np.ndarray


def act(agent: Agent, obs: np.ndarray, params, rng, mode: str = "sample",
        update_stats: bool = False):
    """Turn an observation into an engineering action.

    Returns ``(action, norm_obs, lane_samples)``; ``norm_obs`` and the lane
    samples are what a trainer needs to store.  ``mode`` is "sample" for
    exploration or "mean" for deterministic evaluation.
    """
    if obs.shape != (OBS_DIM,):
        raise ValueError(f"observation must have length {OBS_DIM}")

    hours = empirical_work_hours(params)
    orders = empirical_material_order(float(obs[_STOCK_FORMWORK_SLOT]), params)
    eng = np.concatenate([hours, orders])

    if not agent.lanes:
        return Action(hours=eng[:3], orders=eng[3:]), None, ()

    if update_stats:
        agent.norm.update(obs)
    norm_obs = agent.norm.normalize(obs)
    mid, half = action_mid_half(params)

    samples = []
    for lane in agent.lanes:
        mean, value = lane.bundle.forward(norm_obs)
        if mode == "sample":
            a = mean + np.exp(lane.bundle.logstd) \
                * rng.standard_normal(lane.bundle.action_dim)
        else:
            a = mean.copy()
        logp = float(gaussian_logp(a, mean, lane.bundle.logstd))
        samples.append(LaneSample(a, value, logp, mean))
        sl = slice(lane.start, lane.stop)
        raw = mid[sl] + a * half[sl]
        eng[sl] = raw

    hours = np.clip(eng[:3], params.min_work_hours, params.max_work_hours)
    orders = np.clip(eng[3:], 0.0, params.max_order_arr)
    covered = np.zeros(6, dtype=bool)
    for lane in agent.lanes:
        covered[lane.start:lane.stop] = True
    # only network-driven dims get quantized; rule-driven dims stay verbatim
    if covered[:3].any():
        hours = np.where(covered[:3], np.round(hours * 2.0) / 2.0, hours)
    if covered[3:].any():
        orders = np.where(covered[3:], np.rint(orders), orders)
    return Action(hours=hours, orders=orders), norm_obs, tuple(samples)


def lane_value(agent: Agent, norm_obs: np.ndarray) -> list[float]:
    """Value estimates for an already-normalized observation, per lane."""
    return [lane.bundle.forward(norm_obs)[1] for lane in agent.lanes]


def log_prob(a, mean, logstd) -> float:
    """Gaussian log likelihood of a normalized action (summed over dims)."""
    return float(gaussian_logp(np.asarray(a), np.asarray(mean),
                               np.asarray(logstd)))


# --- checkpoints ---

def save_agent(path, agent: Agent, extra_meta: dict | None = None) -> None:
    if not agent.is_network:
        raise ValueError("only network agents carry parameters to save")
    meta = {"kind": agent.kind,
            "lanes": [lane.bundle.dims | {"start": lane.start,
                                          "stop": lane.stop,
                                          "weights_id": lane.weights_id}
                      for lane in agent.lanes]}
    if extra_meta:
        meta.update(extra_meta)
    arrays = {}
    for i, lane in enumerate(agent.lanes):
        for name, arr in lane.bundle.arrays().items():
            arrays[f"lane{i}/{name}"] = arr
    for name, arr in agent.norm.to_arrays().items():
        arrays[f"norm/{name}"] = arr
    write_flat_arrays(path, meta, arrays)


def load_agent(path) -> tuple[Agent, dict]:
    meta, arrays = read_flat_arrays(path)
    lanes = []
    for i, dims in enumerate(meta["lanes"]):
        bundle = NetworkBundle(
            dims["action_dim"], obs_dim=dims["obs_dim"],
            indirect_slots=tuple(dims["indirect_slots"]),
            branch_hidden=dims["branch_hidden"],
            feature_dim=dims["feature_dim"],
            trunk_width=dims["trunk_width"],
            head_hidden=dims["head_hidden"])
        prefix = f"lane{i}/"
        bundle.load_arrays({k[len(prefix):]: v for k, v in arrays.items()
                            if k.startswith(prefix)})
        lanes.append(PolicyLane(bundle, dims["start"], dims["stop"],
                                dims["weights_id"]))
    norm = NormStats.from_arrays(
        {k.split("/", 1)[1]: v for k, v in arrays.items()
         if k.startswith("norm/")})
    return Agent(kind=meta["kind"], lanes=tuple(lanes), norm=norm), meta
