"""Match runner and evaluation matrix.

A match pits two named policies against each other on one scenario.  All
randomness is pinned by a single integer: game seed ``base_seed + i``
expands via sha256 labels into independent engine and per-policy streams,
so a matrix sliced across any number of worker processes aggregates to
the same result as a serial run.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt
from pathlib import Path

from .bots import BotFrame, ConfigurationError, Policy, make_policy
from .engine import GameState, reset, step
from .replay import ReplayWriter, events_digest
from .rlapi import build_team_view, decode_action, layout_for, side_masks
from .rng import derive_seed
from .scenario import Scenario, Side, SubEnv, resolve_scenario, save_scenario

__all__ = [
    "SeedTriple",
    "seeds_for_game",
    "MatchResult",
    "run_match",
    "CellStats",
    "Matrix",
    "evaluate_matrix",
    "wilson_interval",
]


@dataclass(frozen=True)
class SeedTriple:
    engine: int
    red: int
    blue: int


def seeds_for_game(base_seed: int, game_index: int = 0) -> SeedTriple:
    game = base_seed + game_index
    return SeedTriple(
        engine=derive_seed(game, "engine"),
        red=derive_seed(game, "policy:red"),
        blue=derive_seed(game, "policy:blue"))


@dataclass(frozen=True)
class MatchResult:
    outcome: str                     # red_win | blue_win | draw
    reason: str
    ticks: int
    red_blood: float
    blue_blood: float
    digest: str
    seeds: SeedTriple

    @property
    def winner(self) -> Side | None:
        return {"red_win": Side.RED, "blue_win": Side.BLUE}.get(self.outcome)


def _policy_meta(policy: Policy, seed: int) -> dict:
    return {"name": policy.name, "version": policy.version, "seed": seed}


def run_match(scenario: Scenario, red: Policy, blue: Policy,
              seeds: SeedTriple, replay_path: Path | None = None) -> MatchResult:
    """Simulate one full game; optionally stream a replay file."""
    policies = {Side.RED: red, Side.BLUE: blue}
    red.seed = seeds.red
    blue.seed = seeds.blue
    red.reset(Side.RED, scenario)
    blue.reset(Side.BLUE, scenario)

    layouts = {side: layout_for(scenario, side) for side in Side}
    state = reset(scenario, seeds.engine)

    writer = None
    sink = None
    if replay_path is not None:
        replay_path.parent.mkdir(parents=True, exist_ok=True)
        sink = replay_path.open("w", encoding="utf-8")
        writer = ReplayWriter(sink, scenario, seeds.engine, {
            "red": _policy_meta(red, seeds.red),
            "blue": _policy_meta(blue, seeds.blue)})

    event_records = []
    try:
        while state.outcome is None:
            actions = {}
            for side, policy in policies.items():
                layout = layouts[side]
                view = build_team_view(state, side)
                if not any(f.ready for f in view.friends):
                    continue
                frame = BotFrame(side=side, tick=state.tick, view=view,
                                 masks=side_masks(state, side, layout),
                                 layout=layout, game_map=scenario.map)
                for slot, index in policy.act(frame).items():
                    agent_id = state.slots[side][slot]
                    if agent_id is None:
                        raise ConfigurationError(
                            f"{policy.name} acted for empty slot {slot}")
                    actions[agent_id] = decode_action(index, layout.actions)
            tick = state.tick
            events = step(state, actions)
            event_records.extend(ev.to_record() for ev in events)
            if writer is not None:
                writer.record_tick(tick, actions, events)
        digest = writer.finish(state) if writer is not None \
            else events_digest(event_records)
    finally:
        if sink is not None:
            sink.close()

    outcome = state.outcome
    return MatchResult(
        outcome=outcome.result, reason=outcome.reason, ticks=outcome.ticks,
        red_blood=outcome.red_blood, blue_blood=outcome.blue_blood,
        digest=digest, seeds=seeds)


def wilson_interval(successes: int, n: int, z: float = 1.959963985) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class CellStats:
    red: str
    blue: str
    games: int
    red_wins: int
    blue_wins: int
    draws: int
    mean_ticks: float
    red_win_rate: float
    ci_low: float
    ci_high: float


@dataclass
class Matrix:
    scenario_id: str
    base_seed: int
    games_per_cell: int
    cells: dict[tuple[str, str], CellStats]


def _game_task(scenario_source: str, red_name: str, blue_name: str,
               base_seed: int, game_index: int,
               replay_path: str | None) -> tuple[str, int]:
    """One game, runnable in a worker process.  scenario_source is either a
    builtin id or a scenario document (JSON text)."""
    if scenario_source.lstrip().startswith("{"):
        from .scenario import load_scenario
        scenario = load_scenario(scenario_source)
    else:
        scenario = resolve_scenario(scenario_source)
    seeds = seeds_for_game(base_seed, game_index)
    result = run_match(scenario, make_policy(red_name), make_policy(blue_name),
                       seeds, Path(replay_path) if replay_path else None)
    return result.outcome, result.ticks


def _scenario_source(scenario: Scenario) -> str:
    from .scenario import builtin_scenario
    sid = scenario.scenario_id
    try:
        if builtin_scenario(sid) == scenario:
            return sid
    except Exception:
        pass
    return save_scenario(scenario)


def evaluate_matrix(scenario: Scenario, policy_names: list[str], games: int,
                    base_seed: int, parallelism: int = 1,
                    replay_dir: Path | None = None,
                    progress=None) -> Matrix:
    """Round-robin win-rate matrix over the named policies.

    Seeds advance per (cell, game): cell k gets base_seed + k*games .. so
    every game's seed triple is independent of execution order, making the
    matrix identical for any parallelism level.
    """
    if scenario.subenv is SubEnv.CMAC and "kai1" in policy_names:
        raise ConfigurationError("kai1 cannot play cmac; drop it from the "
                                 "policy list for this scenario")
    source = _scenario_source(scenario)
    pairs = [(r, b) for r in policy_names for b in policy_names]
    tasks = []
    for cell_index, (red_name, blue_name) in enumerate(pairs):
        for g in range(games):
            replay_path = None
            if replay_dir is not None:
                replay_path = str(replay_dir
                                  / f"{scenario.scenario_id.replace('/', '_')}"
                                    f"_{red_name}_vs_{blue_name}_{g}.wgcr")
            tasks.append((source, red_name, blue_name,
                          base_seed + cell_index * games, g, replay_path))

    results: list[tuple[str, int]] = []
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            for i, out in enumerate(pool.map(_game_task_star, tasks,
                                             chunksize=8)):
                results.append(out)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, task in enumerate(tasks):
            results.append(_game_task(*task))
            if progress:
                progress(i + 1, len(tasks))

    cells: dict[tuple[str, str], CellStats] = {}
    cursor = 0
    for red_name, blue_name in pairs:
        chunk = results[cursor:cursor + games]
        cursor += games
        red_wins = sum(1 for outcome, _ in chunk if outcome == "red_win")
        blue_wins = sum(1 for outcome, _ in chunk if outcome == "blue_win")
        draws = sum(1 for outcome, _ in chunk if outcome == "draw")
        mean_ticks = sum(t for _, t in chunk) / max(1, len(chunk))
        rate = red_wins / max(1, len(chunk))
        lo, hi = wilson_interval(red_wins, len(chunk))
        cells[(red_name, blue_name)] = CellStats(
            red=red_name, blue=blue_name, games=len(chunk),
            red_wins=red_wins, blue_wins=blue_wins, draws=draws,
            mean_ticks=mean_ticks, red_win_rate=rate, ci_low=lo, ci_high=hi)
    return Matrix(scenario_id=scenario.scenario_id, base_seed=base_seed,
                  games_per_cell=games, cells=cells)


def _game_task_star(args):
    return _game_task(*args)
