"""On-policy training: rollout collection, advantage estimation, PPO updates.

Each update gathers exactly ``horizon`` environment steps by running project
episodes back to back (fresh exogenous curves per episode), computes
lambda-weighted temporal-difference targets/advantages per episode, then runs
``epochs`` minibatch Adam steps on the clipped surrogate loss

    loss = -clipped_surrogate + value_coef * value_mse - entropy_coef * H

where H is the closed-form Gaussian entropy.  Advantage sums never cross
episode boundaries; an episode cut off by the horizon is bootstrapped with
the value of its next observation, true terminals with zero.

Observation-normalization statistics update online during collection and are
frozen into every checkpoint.  For the double-network agent the same
trajectories feed both lanes, each scored by its own reward preset.

Everything is driven by one seeded generator, so identical seeds give
bit-identical checkpoints and reward curves.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import Agent, act, lane_value
from .env import StepStatus, init_state, step
from .exogenous import sample_project_curves
from .neural import AdamState, gaussian_entropy, gaussian_logp
from .observe import OBS_DIM, build_observation
from .reward import compute_reward


@dataclass
class TrainConfig:
    horizon: int = 1024          # steps gathered per update
    minibatch: int = 128
    epochs: int = 16             # minibatch draws per update
    gamma: float = 0.99
    gae_lambda: float = 0.95
    learning_rate: float = 1e-4
    clip_ratio: float = 0.2
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    updates: int = 500
    checkpoint_every: int = 20
    seed: int = 0
    normalize_advantages: bool = False


@dataclass
class EpisodeRecord:
    start: int
    stop: int
    status: StepStatus
    length: int
    rewards: tuple        # cumulative reward per lane


class RolloutBuffer:
    """Fixed-capacity per-step storage shared by all lanes of one agent."""

    def __init__(self, horizon: int, lane_dims: tuple):
        self.capacity = horizon
        self.lane_dims = lane_dims
        self.obs = np.zeros((horizon, OBS_DIM))
        self.actions = [np.zeros((horizon, d)) for d in lane_dims]
        self.values = [np.zeros(horizon) for _ in lane_dims]
        self.rewards = [np.zeros(horizon) for _ in lane_dims]
        self.logp = [np.zeros(horizon) for _ in lane_dims]
        self.episode_id = np.zeros(horizon, dtype=int)
        self.clear()

    def clear(self) -> None:
        self.size = 0
        self.episodes: list[EpisodeRecord] = []
        self.bootstrap = [0.0 for _ in self.lane_dims]
        self.truncated = False

    @property
    def full(self) -> bool:
        return self.size >= self.capacity

    def add(self, obs, samples, rewards, episode_index) -> None:
        i = self.size
        self.obs[i] = obs
        for k, sample in enumerate(samples):
            self.actions[k][i] = sample.a
            self.values[k][i] = sample.value
            self.logp[k][i] = sample.logp
            self.rewards[k][i] = rewards[k]
        self.episode_id[i] = episode_index
        self.size = i + 1


def collect(buffer: RolloutBuffer, agent: Agent, params, cfg: TrainConfig,
            rng) -> None:
    """Fill the buffer with fresh on-policy experience."""
    assert buffer.size == 0, "buffer must be cleared before collection"
    ep_index = len(buffer.episodes)
    while not buffer.full:
        curves = sample_project_curves(params, rng)
        state = init_state(params, curves)
        ep_start = buffer.size
        ep_rewards = np.zeros(len(agent.lanes))
        while True:
            obs = build_observation(state, curves, params, rng)
            action, norm_obs, samples = act(agent, obs, params, rng,
                                            mode="sample", update_stats=True)
            new_state, st = step(state, action, curves, params, rng)
            rewards = [compute_reward(state, new_state, st, lane.weights,
                                      params).total
                       for lane in agent.lanes]
            # store the network's actual input so log-likelihoods recompute
            buffer.add(norm_obs, samples, rewards, ep_index)
            ep_rewards += rewards
            state = new_state
            if st is not StepStatus.RUNNING:
                buffer.episodes.append(EpisodeRecord(
                    ep_start, buffer.size, st, state.day - 1,
                    tuple(ep_rewards)))
                break
            if buffer.full:
                # horizon truncation: bootstrap with the next observation
                next_obs = build_observation(state, curves, params, rng)
                norm_next = agent.norm.normalize(next_obs)
                buffer.bootstrap = lane_value(agent, norm_next)
                buffer.truncated = True
                buffer.episodes.append(EpisodeRecord(
                    ep_start, buffer.size, st, state.day - 1,
                    tuple(ep_rewards)))
                break
        ep_index += 1


def gae(rewards, values, episode_bounds, gamma, lam, bootstrap=0.0,
        truncated_last=False):
    """Targets and advantages from lambda-weighted TD residuals.

    ``episode_bounds`` is a list of ``(start, stop, terminal)``; credit never
    flows across episodes.  The value after a terminal step is 0; after the
    final step of a truncated episode it is ``bootstrap``.
    """
    n = len(rewards)
    targets = np.zeros(n)
    adv = np.zeros(n)
    for idx, (start, stop, terminal) in enumerate(episode_bounds):
        running = 0.0
        last = stop - 1
        is_last_episode = idx == len(episode_bounds) - 1
        for t in range(last, start - 1, -1):
            if t == last:
                if terminal:
                    v_next = 0.0
                elif is_last_episode and truncated_last:
                    v_next = bootstrap
                else:
                    v_next = 0.0
            else:
                v_next = values[t + 1]
            delta = rewards[t] + gamma * v_next - values[t]
            running = delta + gamma * lam * running
            adv[t] = running
    targets = values + adv
    return targets, adv


def _buffer_bounds(buffer: RolloutBuffer):
    return [(ep.start, ep.stop, ep.status is not StepStatus.RUNNING)
            for ep in buffer.episodes]


class TrainingDiverged(RuntimeError):
    def __init__(self, message, diagnostics):
        super().__init__(f"{message}: {diagnostics}")
        self.diagnostics = diagnostics


def ppo_update(bundle, adam: AdamState, obs, actions, logp_old, targets,
               advantages, cfg: TrainConfig, rng) -> dict:
    """One full PPO optimization pass (``epochs`` minibatch Adam steps)."""
    n = obs.shape[0]
    batch = min(cfg.minibatch, n)
    diag = {"policy_loss": 0.0, "value_loss": 0.0, "entropy": 0.0,
            "clip_fraction": 0.0}
    params = bundle.parameters()
    for _ in range(cfg.epochs):
        idx = rng.choice(n, size=batch, replace=False)
        o = obs[idx]
        a = actions[idx]
        lp_old = logp_old[idx]
        tar = targets[idx]
        adv = advantages[idx]
        if cfg.normalize_advantages:
            adv = (adv - adv.mean()) / (adv.std() + 1e-8)

        mean, value, cache = bundle.forward_cached(o)
        logstd = bundle.logstd
        var = np.exp(2.0 * logstd)
        lp_new = gaussian_logp(a, mean, logstd)
        ratio = np.exp(lp_new - lp_old)
        clipped = np.clip(ratio, 1.0 - cfg.clip_ratio, 1.0 + cfg.clip_ratio)
        surr1 = ratio * adv
        surr2 = clipped * adv
        surrogate = np.minimum(surr1, surr2)
        unclipped_active = surr1 <= surr2

        value_err = value - tar
        entropy = gaussian_entropy(logstd)
        policy_loss = -surrogate.mean()
        value_loss = float(np.mean(value_err ** 2))
        loss = policy_loss + cfg.value_coef * value_loss \
            - cfg.entropy_coef * entropy
        if not np.isfinite(loss):
            raise TrainingDiverged("non-finite loss", {
                "policy_loss": float(policy_loss),
                "value_loss": value_loss, "entropy": entropy})

        # d(loss)/d(logp); the clipped branch carries no gradient
        d_logp = np.where(unclipped_active, -adv * ratio, 0.0) / batch
        d_mean = d_logp[:, None] * (a - mean) / var
        d_logstd = (d_logp[:, None]
                    * (-1.0 + (a - mean) ** 2 / var)).sum(axis=0)
        d_logstd -= cfg.entropy_coef  # entropy bonus gradient
        d_value = cfg.value_coef * 2.0 * value_err / batch

        grads = bundle.backward(cache, d_mean, d_value)
        grads["logstd"] = d_logstd
        adam.update(params, grads)

        diag["policy_loss"] += float(policy_loss) / cfg.epochs
        diag["value_loss"] += value_loss / cfg.epochs
        diag["entropy"] += entropy / cfg.epochs
        diag["clip_fraction"] += float(np.mean(~unclipped_active)) / cfg.epochs
    return diag


@dataclass
class TrainResult:
    agent: Agent
    history: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)


def train(params, agent: Agent, cfg: TrainConfig, out_dir=None,
          progress=None) -> TrainResult:
    """Alternate collect / estimate / update for ``cfg.updates`` rounds."""
    if not agent.is_network:
        raise ValueError("the empirical policy has nothing to train")
    rng = np.random.default_rng(cfg.seed)
    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    lane_dims = tuple(lane.bundle.action_dim for lane in agent.lanes)
    buffer = RolloutBuffer(cfg.horizon, lane_dims)
    adams = [AdamState(lr=cfg.learning_rate) for _ in agent.lanes]
    result = TrainResult(agent=agent)

    def save(update):
        if out_dir is None:
            return
        path = out_dir / f"checkpoint_{update:06d}.ckpt"
        save_checkpoint(path, agent, update)
        if path not in result.checkpoints:
            result.checkpoints.append(path)

    for update in range(1, cfg.updates + 1):
        collect(buffer, agent, params, cfg, rng)
        bounds = _buffer_bounds(buffer)
        diags = []
        for k, lane in enumerate(agent.lanes):
            targets, advantages = gae(
                buffer.rewards[k][:buffer.size], buffer.values[k][:buffer.size],
                bounds, cfg.gamma, cfg.gae_lambda,
                bootstrap=buffer.bootstrap[k],
                truncated_last=buffer.truncated)
            diags.append(ppo_update(
                lane.bundle, adams[k], buffer.obs[:buffer.size],
                buffer.actions[k][:buffer.size], buffer.logp[k][:buffer.size],
                targets, advantages, cfg, rng))

        finished = [ep for ep in buffer.episodes
                    if ep.status is not StepStatus.RUNNING]
        if finished:
            mean_reward = float(np.mean([np.mean(ep.rewards)
                                         for ep in finished]))
            mean_duration = float(np.mean([ep.length for ep in finished]))
            completion = float(np.mean(
                [ep.status is StepStatus.COMPLETED for ep in finished]))
        else:  # pragma: no cover - an episode always fits in the horizon
            mean_reward = mean_duration = completion = float("nan")
        row = {"update": update, "mean_episode_reward": mean_reward,
               "mean_duration": mean_duration, "completion_rate": completion,
               "policy_loss": diags[0]["policy_loss"],
               "value_loss": diags[0]["value_loss"],
               "entropy": diags[0]["entropy"],
               "clip_fraction": diags[0]["clip_fraction"]}
        result.history.append(row)
        if progress is not None:
            progress(row)
        buffer.clear()
        if update % cfg.checkpoint_every == 0:
            save(update)
    save(cfg.updates)

    if out_dir is not None:
        write_reward_curve(out_dir / "reward_curve.csv", result.history)
    return result


def save_checkpoint(path, agent: Agent, update: int) -> None:
    from .agents import save_agent
    save_agent(path, agent, {"update": update})


def write_reward_curve(path, history) -> None:
    cols = ["update", "mean_episode_reward", "mean_duration",
            "completion_rate", "policy_loss", "value_loss", "entropy",
            "clip_fraction"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in history:
            writer.writerow([row["update"]]
                            + [repr(row[c]) for c in cols[1:]])
