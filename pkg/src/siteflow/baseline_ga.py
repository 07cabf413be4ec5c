"""Genetic-algorithm baseline: the whole action trajectory as one bit string.

Each day costs 14 bits: 2 bits per trade pick work hours from {4, 8, 10, 12};
3 bits each quantize the rebar and formwork orders onto 8 uniform levels of
their ranges; 2 bits pick the concrete order from {0, 100, 200, 300}.  A
chromosome therefore fixes the decision for every possible project day up
front, with no feedback from observations - which is exactly the handicap
this baseline is meant to demonstrate.

Evolution is a plain generational GA: tournament selection, single-point
crossover, per-bit mutation, and one elite carried over unchanged.  Fitness
is the cumulative episode reward (preset 1 weights, for comparability with
the learned agents), averaged over a configurable number of evaluation
repetitions with fresh exogenous samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .reward import AGENT_WEIGHTS
from .simulate import run_action_sequence

BITS_PER_DAY = 14
WH_LEVELS = np.array([4.0, 8.0, 10.0, 12.0])

_DAY_FIELDS = ((0, 2), (2, 4), (4, 6), (6, 9), (9, 12), (12, 14))


@dataclass
class GaConfig:
    population: int = 256
    generations: int = 1024
    crossover: float = 0.8
    mutation: float | None = None     # defaults to 1/length
    tournament: int = 2
    elites: int = 1
    reps: int = 3                     # evaluation repetitions per individual
    seed: int = 0


def order_levels(params):
    """Quantization levels per material (8 / 8 / 4 uniform levels)."""
    caps = params.max_order_arr
    return (np.rint(np.linspace(0.0, caps[0], 8)),
            np.rint(np.linspace(0.0, caps[1], 8)),
            np.rint(np.linspace(0.0, caps[2], 4)))


def chromosome_length(params) -> int:
    return params.max_days * BITS_PER_DAY


def _field_indices(bits2d, lo, hi):
    width = hi - lo
    weights = 1 << np.arange(width - 1, -1, -1)
    return bits2d[:, lo:hi] @ weights


def decode(bits, params) -> np.ndarray:
    """Bit string -> (max_days, 6) array of daily actions."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (chromosome_length(params),):
        raise ValueError(
            f"chromosome must have {chromosome_length(params)} bits")
    days = bits.reshape(params.max_days, BITS_PER_DAY)
    rb_levels, fw_levels, cc_levels = order_levels(params)
    actions = np.empty((params.max_days, 6))
    for dim, (lo, hi) in enumerate(_DAY_FIELDS[:3]):
        actions[:, dim] = WH_LEVELS[_field_indices(days, lo, hi)]
    actions[:, 3] = rb_levels[_field_indices(days, *_DAY_FIELDS[3])]
    actions[:, 4] = fw_levels[_field_indices(days, *_DAY_FIELDS[4])]
    actions[:, 5] = cc_levels[_field_indices(days, *_DAY_FIELDS[5])]
    return actions


def encode(actions, params) -> np.ndarray:
    """Quantize a (max_days, 6) action table onto the grid and pack bits."""
    actions = np.asarray(actions, dtype=float)
    if actions.shape != (params.max_days, 6):
        raise ValueError(f"need a ({params.max_days}, 6) action table")
    rb_levels, fw_levels, cc_levels = order_levels(params)
    levels = [WH_LEVELS] * 3 + [rb_levels, fw_levels, cc_levels]
    bits = np.zeros((params.max_days, BITS_PER_DAY), dtype=np.uint8)
    for dim, ((lo, hi), lv) in enumerate(zip(_DAY_FIELDS, levels)):
        idx = np.abs(actions[:, dim][:, None] - lv[None, :]).argmin(axis=1)
        width = hi - lo
        for j in range(width):
            bits[:, lo + j] = (idx >> (width - 1 - j)) & 1
    return bits.reshape(-1)


def evaluate(bits, params, rng_or_seed, weights=None, reps: int = 1) -> float:
    """Mean cumulative reward of the decoded trajectory over fresh samples."""
    if weights is None:
        weights = AGENT_WEIGHTS[1]
    rng = rng_or_seed if hasattr(rng_or_seed, "standard_normal") \
        else np.random.default_rng(rng_or_seed)
    actions = decode(bits, params)
    total = 0.0
    for _ in range(reps):
        result = run_action_sequence(actions, params, rng, weights)
        total += result.total_reward
    return total / reps


@dataclass
class GaResult:
    best_bits: np.ndarray
    best_fitness: float
    history: list = field(default_factory=list)   # per generation rows


def evolve(params, cfg: GaConfig, progress=None) -> GaResult:
    rng = np.random.default_rng(cfg.seed)
    length = chromosome_length(params)
    mutation = cfg.mutation if cfg.mutation is not None else 1.0 / length
    weights = AGENT_WEIGHTS[1]

    pop = (rng.random((cfg.population, length)) < 0.5).astype(np.uint8)
    fitness = np.array([evaluate(ind, params, rng, weights, cfg.reps)
                        for ind in pop])
    best_idx = int(fitness.argmax())
    best_bits = pop[best_idx].copy()
    best_fitness = float(fitness[best_idx])
    history = [{"generation": 0, "best": best_fitness,
                "mean": float(fitness.mean())}]
    if progress is not None:
        progress(history[-1])

    for gen in range(1, cfg.generations + 1):
        order = np.argsort(fitness)[::-1]
        elites = [pop[i].copy() for i in order[:cfg.elites]]
        elite_fit = [float(fitness[i]) for i in order[:cfg.elites]]

        children = []
        while len(children) < cfg.population - cfg.elites:
            picks = rng.integers(0, cfg.population, size=cfg.tournament)
            p1 = pop[picks[np.argmax(fitness[picks])]]
            picks = rng.integers(0, cfg.population, size=cfg.tournament)
            p2 = pop[picks[np.argmax(fitness[picks])]]
            c1, c2 = p1.copy(), p2.copy()
            if rng.random() < cfg.crossover:
                point = int(rng.integers(1, length))
                c1[point:], c2[point:] = p2[point:].copy(), p1[point:].copy()
            for child in (c1, c2):
                flips = rng.random(length) < mutation
                child[flips] ^= 1
                children.append(child)
        children = children[:cfg.population - cfg.elites]

        child_fit = [evaluate(c, params, rng, weights, cfg.reps)
                     for c in children]
        pop = np.array(elites + children, dtype=np.uint8)
        fitness = np.array(elite_fit + child_fit)

        gen_best = int(fitness.argmax())
        if fitness[gen_best] > best_fitness:
            best_fitness = float(fitness[gen_best])
            best_bits = pop[gen_best].copy()
        history.append({"generation": gen, "best": best_fitness,
                        "mean": float(fitness.mean())})
        if progress is not None:
            progress(history[-1])
    return GaResult(best_bits=best_bits, best_fitness=best_fitness,
                    history=history)


def write_fitness_history(path, history) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best", "mean"])
        for row in history:
            writer.writerow([row["generation"], repr(row["best"]),
                             repr(row["mean"])])
