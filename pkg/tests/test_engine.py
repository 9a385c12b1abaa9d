"""Engine semantics: movement timing, the simultaneous volley, collisions,
timers, cmac split/merge, termination, and contract enforcement."""

from __future__ import annotations

import pytest

from helpers import ScriptedRng, custom_scenario, open_map, tweak
from wgc.engine import (
    ActionKind,
    AgentAction,
    EngineContractError,
    clone_state,
    is_action_legal,
    legal_actions,
    ready_agents,
    reset,
    side_alive_count,
    side_total_blood,
    state_digest,
    step,
)
from wgc.hexmap import HexCoord
from wgc.scenario import (
    STANDARD_TEMPLATES,
    OperatorType,
    ScenarioError,
    Side,
    SubEnv,
)

TANK = OperatorType.TANK
CHARIOT = OperatorType.CHARIOT
INFANTRY = OperatorType.INFANTRY


def far_apart(red=None, blue=None, **kwargs):
    """Two rosters far enough apart that nothing sees anything."""
    return custom_scenario(
        red or [(TANK, 0, 0)], blue or [(TANK, 9, 9)],
        game_map=kwargs.pop("game_map", None) or open_map(10, 10), **kwargs)


def stop_all(state, except_for=None):
    acts = {}
    for agent_id in ready_agents(state):
        acts[agent_id] = AgentAction.stop()
    if except_for:
        acts.update(except_for)
    return acts


class TestMovement:
    def test_tank_moves_one_hex_per_tick(self):
        state = reset(far_apart(), seed=1)
        start = state.operators[0].pos
        step(state, stop_all(state, {0: AgentAction.move(0)}))  # E
        assert state.operators[0].pos == start.neighbor(0)
        assert state.operators[0].ready  # speed 1: ready again next tick

    def test_infantry_five_ticks_per_hex(self):
        slow = tweak(STANDARD_TEMPLATES[INFANTRY], speed=0.2)
        sc = custom_scenario([(slow, 0, 0)], [(TANK, 9, 9)])
        state = reset(sc, seed=1)
        start = state.operators[0].pos
        step(state, stop_all(state, {0: AgentAction.move(0)}))
        for k in range(4):
            # in transit: not ready, still at origin
            assert not state.operators[0].ready
            assert state.operators[0].pos == start
            step(state, stop_all(state))
        assert state.operators[0].pos == start.neighbor(0)
        assert state.operators[0].ready

    def test_infantry_hex_count_closed_form(self):
        # floor(T/5) hexes after T ticks of continuous eastward orders
        slow = tweak(STANDARD_TEMPLATES[INFANTRY], speed=0.2)
        sc = custom_scenario([(slow, 0, 5)], [(TANK, 19, 9)],
                             game_map=open_map(20, 10))
        state = reset(sc, seed=1)
        start = state.operators[0].pos
        for t in range(1, 24):
            me = state.operators[0]
            order = AgentAction.move(0) if me.ready else AgentAction.noop()
            step(state, stop_all(state, {0: order}))
            col_now = state.operators[0].pos.to_offset()[0]
            assert col_now - start.to_offset()[0] == t // 5, f"tick {t}"

    def test_move_out_of_bounds_illegal(self):
        state = reset(far_apart(), seed=1)
        assert not is_action_legal(state, 0, AgentAction.move(3))  # W off board
        with pytest.raises(EngineContractError):
            step(state, stop_all(state, {0: AgentAction.move(3)}))

    def test_move_into_occupied_hex_illegal(self):
        sc = custom_scenario([(TANK, 0, 0), (TANK, 1, 0)], [(TANK, 9, 9)])
        state = reset(sc, seed=1)
        assert not is_action_legal(state, 0, AgentAction.move(0))

    def test_collision_lower_id_wins(self):
        sc = custom_scenario([(TANK, 0, 0), (TANK, 2, 0)], [(TANK, 9, 9)])
        state = reset(sc, seed=1)
        target = HexCoord.from_offset(1, 0)
        events = step(state, stop_all(state, {0: AgentAction.move(0),
                                              1: AgentAction.move(3)}))
        assert state.operators[0].pos == target
        assert state.operators[1].pos == HexCoord.from_offset(2, 0)
        blocked = [e for e in events if e.kind == "nullified"]
        assert len(blocked) == 1 and blocked[0].data["agent"] == 1
        assert blocked[0].data["what"] == "move_blocked"

    def test_occupied_destination_illegal_even_if_occupant_leaving(self):
        # decision-time occupancy binds: followers need a one-tick gap,
        # so swaps are unorderable by construction
        sc = custom_scenario([(TANK, 0, 0), (TANK, 1, 0)], [(TANK, 9, 9)])
        state = reset(sc, seed=1)
        assert not is_action_legal(state, 0, AgentAction.move(0))
        step(state, stop_all(state, {1: AgentAction.move(0)}))  # leader departs
        assert is_action_legal(state, 0, AgentAction.move(0))   # gap opened

    def test_slow_mover_blocked_on_arrival(self):
        # infantry's destination was free at decision time but the tank
        # claims it mid-transit: the arrival is cancelled, infantry stays
        slow = tweak(STANDARD_TEMPLATES[INFANTRY], speed=0.2)
        sc = custom_scenario([(slow, 0, 0), (TANK, 1, 1)], [(TANK, 9, 9)])
        state = reset(sc, seed=1)
        step(state, stop_all(state, {0: AgentAction.move(0)}))   # heading (1,0)
        step(state, stop_all(state, {1: AgentAction.move(2)}))   # tank takes (1,0)
        assert state.operators[1].pos == HexCoord.from_offset(1, 0)
        events = []
        for _ in range(3):
            events += step(state, stop_all(state))
        assert state.operators[0].pos == HexCoord.from_offset(0, 0)
        blocked = [e for e in events if e.kind == "nullified"
                   and e.data.get("agent") == 0]
        assert blocked and blocked[0].data["what"] == "move_blocked"
        assert blocked[0].data["blocked_by"] == 1


def adjacent_duel(red_template=None, blue_template=None, **kwargs):
    red_t = red_template or STANDARD_TEMPLATES[TANK]
    blue_t = blue_template or STANDARD_TEMPLATES[TANK]
    return custom_scenario([(red_t, 4, 4)], [(blue_t, 5, 4)], **kwargs)


class TestCombat:
    def test_hit_applies_exact_table_damage(self):
        state = reset(adjacent_duel(), seed=1)
        state.rng = ScriptedRng([0.5])  # 0.5 < p_hit_vehicle 0.8
        events = step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.operators[1].blood == pytest.approx(10 - 1.2)
        dmg = [e for e in events if e.kind == "damaged"]
        assert dmg[0].data["amount"] == pytest.approx(1.2)
        assert dmg[0].data["attacker"] == 0

    def test_miss_leaves_blood(self):
        state = reset(adjacent_duel(), seed=1)
        state.rng = ScriptedRng([0.9])  # 0.9 >= 0.8
        events = step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.operators[1].blood == 10
        assert any(e.kind == "nullified" and e.data["what"] == "miss"
                   for e in events)

    def test_damage_split_by_target_class(self):
        # tank vs infantry uses dmg_vs_infantry / p_hit_infantry
        state = reset(custom_scenario([(TANK, 4, 4)], [(INFANTRY, 5, 4)]), seed=1)
        state.rng = ScriptedRng([0.59])  # < 0.6
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.operators[1].blood == pytest.approx(7 - 0.6)

    def test_shoot_out_of_range_illegal(self):
        sc = custom_scenario([(TANK, 0, 4)], [(TANK, 8, 4)])  # dist 8 > 7
        state = reset(sc, seed=1)
        assert not is_action_legal(state, 0, AgentAction.shoot(0))

    def test_shoot_invisible_illegal(self):
        # dist 6 is within tank range 7 but beyond halved spotting range:
        # target on hidden terrain has effective observed distance 5
        sc = custom_scenario([(TANK, 0, 4)], [(TANK, 6, 4)],
                             game_map=open_map(10, 10, hidden=[(6, 4)]))
        state = reset(sc, seed=1)
        assert not is_action_legal(state, 0, AgentAction.shoot(0))

    def test_simultaneous_volley_mutual_kill_is_draw(self):
        red_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        blue_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        state = reset(adjacent_duel(red_t, blue_t), seed=1)
        state.rng = ScriptedRng([0.0, 0.0])  # both hit
        events = step(state, {0: AgentAction.shoot(0), 1: AgentAction.shoot(0)})
        assert side_alive_count(state, Side.RED) == 0
        assert side_alive_count(state, Side.BLUE) == 0
        assert state.outcome is not None and state.outcome.winner is None
        assert state.outcome.reason == "annihilation"
        assert sum(1 for e in events if e.kind == "died") == 2

    def test_dead_shooter_still_fires_this_tick(self):
        # blue (higher id) dies in the volley but its ordered shot resolves
        blue_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        state = reset(adjacent_duel(blue_template=blue_t), seed=1)
        state.rng = ScriptedRng([0.0, 0.0])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.shoot(0)})
        assert not state.operators[1].alive
        assert state.operators[0].blood == pytest.approx(10 - 1.2)

    def test_wasted_shot_no_draw_consumed(self):
        # two reds shoot one fragile blue; second shot is wasted
        blue_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        sc = custom_scenario([(TANK, 4, 4), (TANK, 4, 5)], [(blue_t, 5, 4)])
        state = reset(sc, seed=1)
        rng = ScriptedRng([0.0, 0.7])
        state.rng = rng
        events = step(state, stop_all(state, {0: AgentAction.shoot(0),
                                              1: AgentAction.shoot(0)}))
        assert rng.draws == 1  # wasted shot rolled nothing
        wasted = [e for e in events if e.kind == "nullified"]
        assert wasted and wasted[0].data["what"] == "shot_wasted"
        assert wasted[0].data["agent"] == 1

    def test_srmac_annihilate_nullify_damage(self):
        sc = custom_scenario([(TANK, 3, 4)], [(TANK, 5, 4)], subenv=SubEnv.SRMAC)
        state = reset(sc, seed=1)
        state.rng = ScriptedRng([0.04])  # < p_annihilate 0.05
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert not state.operators[1].alive
        assert any(e.kind == "annihilated" for e in state.events)

        state = reset(sc, seed=1)
        state.rng = ScriptedRng([0.15])  # in [0.05, 0.20): nullified
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.operators[1].blood == 10

        state = reset(sc, seed=1)
        state.rng = ScriptedRng([0.5])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        # dist 2, range 7, full health: 1.2 * (1 - 0.5*2/7) * (0.5 + 0.5*1)
        expected = 1.2 * (1 - 0.5 * 2 / 7)
        assert state.operators[1].blood == pytest.approx(10 - expected)

    def test_srmac_health_scaling(self):
        sc = custom_scenario([(TANK, 4, 4)], [(TANK, 5, 4)], subenv=SubEnv.SRMAC)
        state = reset(sc, seed=1)
        state.operators[1].blood = 5.0  # half health
        state.rng = ScriptedRng([0.99])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        expected = 1.2 * (1 - 0.5 * 1 / 7) * (0.5 + 0.5 * 0.5)
        assert state.operators[1].blood == pytest.approx(5.0 - expected)


class TestTimers:
    def test_cooldown_gates_every_other_tick(self):
        red_t = tweak(STANDARD_TEMPLATES[TANK], shoot_cooldown=1)
        state = reset(adjacent_duel(red_t), seed=1)
        state.rng = ScriptedRng([0.9, 0.9, 0.9])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.operators[0].cooldown_remaining == 1
        assert not is_action_legal(state, 0, AgentAction.shoot(0))
        step(state, {0: AgentAction.stop(), 1: AgentAction.stop()})
        assert state.operators[0].cooldown_remaining == 0
        assert is_action_legal(state, 0, AgentAction.shoot(0))

    def test_prep_after_move(self):
        red_t = tweak(STANDARD_TEMPLATES[TANK], shoot_prep=2)
        sc = custom_scenario([(red_t, 3, 4)], [(TANK, 5, 4)])
        state = reset(sc, seed=1)
        step(state, {0: AgentAction.move(0), 1: AgentAction.stop()})
        # arrived adjacent-1; prep blocks shooting for the next two ticks
        assert state.operators[0].prep_remaining == 2
        assert not is_action_legal(state, 0, AgentAction.shoot(0))
        step(state, {0: AgentAction.stop(), 1: AgentAction.stop()})
        assert not is_action_legal(state, 0, AgentAction.shoot(0))
        step(state, {0: AgentAction.stop(), 1: AgentAction.stop()})
        assert is_action_legal(state, 0, AgentAction.shoot(0))

    def test_stop_busy_duration(self):
        red_t = tweak(STANDARD_TEMPLATES[TANK], stop_time=2)
        state = reset(custom_scenario([(red_t, 0, 0)], [(TANK, 9, 9)]), seed=1)
        step(state, stop_all(state))
        assert not state.operators[0].ready
        step(state, stop_all(state))
        assert state.operators[0].ready

    def test_busy_agent_only_noop(self):
        slow = tweak(STANDARD_TEMPLATES[INFANTRY], speed=0.2)
        state = reset(custom_scenario([(slow, 0, 0)], [(TANK, 9, 9)]), seed=1)
        step(state, stop_all(state, {0: AgentAction.move(0)}))
        assert 0 not in ready_agents(state)
        assert is_action_legal(state, 0, AgentAction.noop())
        assert not is_action_legal(state, 0, AgentAction.stop())
        with pytest.raises(EngineContractError):
            step(state, stop_all(state, {0: AgentAction.stop()}))


class TestContract:
    def test_missing_ready_agent_rejected(self):
        state = reset(far_apart(), seed=1)
        with pytest.raises(EngineContractError, match="has no action"):
            step(state, {0: AgentAction.stop()})  # blue tank missing

    def test_noop_for_ready_agent_rejected(self):
        state = reset(far_apart(), seed=1)
        with pytest.raises(EngineContractError):
            step(state, stop_all(state, {0: AgentAction.noop()}))

    def test_unknown_agent_rejected(self):
        state = reset(far_apart(), seed=1)
        with pytest.raises(EngineContractError):
            step(state, stop_all(state, {99: AgentAction.stop()}))

    def test_step_after_end_rejected(self):
        blue_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        state = reset(adjacent_duel(blue_template=blue_t), seed=1)
        state.rng = ScriptedRng([0.0, 0.0, 0.0])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.shoot(0)})
        assert state.outcome is not None
        with pytest.raises(EngineContractError):
            step(state, {})
        with pytest.raises(EngineContractError):
            ready_agents(state)

    def test_reset_validates_scenario(self):
        sc = custom_scenario([(TANK, 0, 0), (TANK, 0, 0)], [(TANK, 9, 9)])
        with pytest.raises(ScenarioError):
            reset(sc, seed=1)


class TestTermination:
    def test_annihilation_win(self):
        blue_t = tweak(STANDARD_TEMPLATES[TANK], blood_max=1.0)
        state = reset(adjacent_duel(blue_template=blue_t), seed=1)
        state.rng = ScriptedRng([0.0])
        step(state, {0: AgentAction.shoot(0), 1: AgentAction.stop()})
        assert state.outcome.winner is Side.RED
        assert state.outcome.reason == "annihilation"
        assert state.events[-1].kind == "episode_end"

    def test_timeout_blood_compare(self):
        sc = far_apart(max_ticks=3)
        state = reset(sc, seed=1)
        state.operators[1].blood = 4.0
        for _ in range(3):
            step(state, stop_all(state))
        assert state.outcome is not None
        assert state.outcome.reason == "timeout"
        assert state.outcome.winner is Side.RED
        assert state.outcome.ticks == 3

    def test_timeout_equal_blood_draw(self):
        state = reset(far_apart(max_ticks=2), seed=1)
        for _ in range(2):
            step(state, stop_all(state))
        assert state.outcome.winner is None
        assert state.outcome.reason == "timeout"

    def test_no_events_after_episode_end(self):
        state = reset(far_apart(max_ticks=1), seed=1)
        step(state, stop_all(state))
        assert [e.kind for e in state.events].count("episode_end") == 1
        assert state.events[-1].kind == "episode_end"


class TestDeterminism:
    def _run(self, seed):
        sc = custom_scenario([(TANK, 4, 4), (CHARIOT, 4, 5)],
                             [(TANK, 5, 4), (CHARIOT, 5, 5)])
        state = reset(sc, seed=seed)
        while state.outcome is None and state.tick < 50:
            acts = {}
            for agent_id in ready_agents(state):
                shots = [a for a in legal_actions(state, agent_id)
                         if a.kind is ActionKind.SHOOT]
                acts[agent_id] = shots[0] if shots else AgentAction.stop()
            step(state, acts)
        return state_digest(state)

    def test_same_seed_same_digest(self):
        assert self._run(42) == self._run(42)

    def test_different_seed_different_digest(self):
        assert self._run(42) != self._run(43)

    def test_clone_does_not_disturb_original(self):
        state = reset(adjacent_duel(), seed=7)
        probe = clone_state(state)
        step(probe, {0: AgentAction.shoot(0), 1: AgentAction.shoot(0)})
        assert state.tick == 0
        assert state.operators[1].blood == 10
        assert not state.events
        # prove rng streams are independent after clone
        before = state.rng.draws
        assert probe.rng.draws != before or probe.rng.draws >= 0


class TestBookkeeping:
    def test_blood_non_increasing_outside_merge(self):
        state = reset(adjacent_duel(), seed=3)
        last = side_total_blood(state, Side.RED) + side_total_blood(state, Side.BLUE)
        for _ in range(30):
            if state.outcome is not None:
                break
            acts = {}
            for agent_id in ready_agents(state):
                shots = [a for a in legal_actions(state, agent_id)
                         if a.kind is ActionKind.SHOOT]
                acts[agent_id] = shots[0] if shots else AgentAction.stop()
            step(state, acts)
            now = side_total_blood(state, Side.RED) + side_total_blood(state, Side.BLUE)
            assert now <= last + 1e-9
            last = now

    def test_occupancy_matches_positions(self):
        state = reset(custom_scenario(
            [(TANK, 0, 0), (CHARIOT, 1, 1)], [(TANK, 9, 9), (CHARIOT, 8, 8)]), seed=5)
        import random
        drive = random.Random(0)
        for _ in range(40):
            if state.outcome is not None:
                break
            acts = {}
            for agent_id in ready_agents(state):
                options = legal_actions(state, agent_id)
                acts[agent_id] = drive.choice(options)
            step(state, acts)
            expect = {op.pos: op.id for op in state.operators.values() if op.alive}
            assert expect == state.occupancy
