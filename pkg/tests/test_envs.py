import json

import numpy as np
import pytest

from vqdqn import envs
from vqdqn.envs import FrozenLakeMap, RadioPattern, cr_state_index, cr_step, fl_reset, fl_step
from vqdqn.envs.frozen_lake import DOWN, LEFT, RIGHT, UP, reachable_states
from vqdqn.errors import ConfigError, UsageError

DEFAULT = FrozenLakeMap(("SFFF", "FHFH", "FFFH", "HFFG"))


def test_reset_examples():
    assert fl_reset(DEFAULT) == 0
    assert fl_reset(FrozenLakeMap(("FFFF", "FFSF", "FFFF", "FFFG"))) == 6


def test_map_without_start_rejected():
    with pytest.raises(ConfigError, match="START"):
        FrozenLakeMap(("FFFF", "FHFH", "FFFH", "HFFG"))


def test_map_without_goal_rejected():
    with pytest.raises(ConfigError, match="GOAL"):
        FrozenLakeMap(("SFFF", "FHFH", "FFFH", "HFFF"))


def test_unknown_cell_named():
    with pytest.raises(ConfigError, match=r"\(2, 1\)"):
        FrozenLakeMap(("SFFF", "FHFH", "FXFH", "HFFG"))


def test_unreachable_goal_rejected():
    walled = ("SFFF", "FFFF", "FFHH", "FFHG")
    with pytest.raises(ConfigError, match="unreachable"):
        FrozenLakeMap(walled)


def brute_reachable(grid):
    """Reachability by repeated relaxation, independent of the BFS in the package."""
    rows, cols = len(grid), len(grid[0])
    start = next((r, c) for r in range(rows) for c in range(cols) if grid[r][c] == "S")
    seen = {start}
    changed = True
    while changed:
        changed = False
        for r, c in list(seen):
            if grid[r][c] in "HG":
                continue
            for dr, dc in ((0, -1), (1, 0), (0, 1), (-1, 0)):
                nr, nc = min(max(r + dr, 0), rows - 1), min(max(c + dc, 0), cols - 1)
                if (nr, nc) not in seen:
                    seen.add((nr, nc))
                    changed = True
    return {r * cols + c for r, c in seen}


@pytest.mark.parametrize("name", ["frozen-lake-a", "frozen-lake-b", "frozen-lake-c"])
def test_reachability_matches_relaxation_oracle(name):
    lake = envs.load_env_config(name)
    assert reachable_states(lake) == brute_reachable(lake.grid)


def test_step_examples():
    out = fl_step(DEFAULT, 14, RIGHT)
    assert out == (15, 1.0, True, False)
    out = fl_step(DEFAULT, 0, LEFT)
    assert out.next_state == 0 and out.reward == -0.01 and not out.terminal
    out = fl_step(DEFAULT, 1, DOWN)
    assert out.next_state == 5 and out.reward == -0.2 and out.terminal


def test_step_from_terminal_is_usage_error():
    with pytest.raises(UsageError):
        fl_step(DEFAULT, 5, UP)


def test_reward_closure_and_determinism_exhaustive():
    for s in range(16):
        if DEFAULT.is_terminal(s):
            continue
        for a in range(4):
            out = fl_step(DEFAULT, s, a)
            assert out.reward in (-0.2, 1.0, -0.01)
            assert fl_step(DEFAULT, s, a) == out
    for n in range(2, 6):
        pattern = RadioPattern.sweep(n)
        for t in range(2 * n):
            for a in range(n):
                out = cr_step(pattern, t, a)
                assert out.reward in (-1.0, 1.0)
                assert cr_step(pattern, t, a) == out


def test_frozen_lake_episode_cap():
    env = envs.make_env("frozen-lake-a", max_steps=7)
    env.reset()
    outs = [env.step(LEFT) for _ in range(7)]
    assert outs[-1].truncated and not any(o.truncated for o in outs[:-1])


def test_state_index_examples():
    assert cr_state_index(2, 5, 4) == 9
    for n in range(2, 6):
        assert cr_state_index(0, 0, n) == 0
    assert max(cr_state_index(c, t, 3) for c in range(3) for t in range(3)) < 9 <= 2**4


def test_state_index_enumeration():
    for n in range(2, 6):
        seen = {cr_state_index(c, t, n) for c in range(n) for t in range(n)}
        assert seen == set(range(n * n))


def run_radio(env, policy):
    s = env.reset()
    total, steps = 0.0, 0
    while True:
        out = env.step(policy(steps, s))
        total += out.reward
        steps += 1
        if out.terminal:
            return total, steps
        s = out.next_state


def test_perfect_policy_scores_100():
    pattern = RadioPattern.sweep(4)
    env = envs.RadioEnv(pattern)
    total, steps = run_radio(env, lambda t, s: (pattern.occupied(t) + 1) % 4)
    assert (total, steps) == (100.0, 100)


def test_three_early_collisions():
    pattern = RadioPattern.sweep(3)
    env = envs.RadioEnv(pattern)
    assert run_radio(env, lambda t, s: pattern.occupied(t)) == (-3.0, 3)


def test_single_collision_scores_98():
    pattern = RadioPattern.sweep(5)
    env = envs.RadioEnv(pattern)
    policy = lambda t, s: pattern.occupied(t) if t == 40 else (pattern.occupied(t) + 2) % 5
    assert run_radio(env, policy) == (98.0, 100)


def test_collisions_reset_between_episodes():
    pattern = RadioPattern.sweep(2)
    env = envs.RadioEnv(pattern)
    policy = lambda t, s: pattern.occupied(t) if t < 2 else 1 - pattern.occupied(t)
    assert run_radio(env, policy) == (96.0, 100)
    assert run_radio(env, policy) == (96.0, 100)


def test_radio_score_bounds_random_policies():
    rng = np.random.default_rng(0)
    for n in range(2, 6):
        env = envs.RadioEnv(RadioPattern.sweep(n))
        for _ in range(20):
            total, _ = run_radio(env, lambda t, s: int(rng.integers(n)))
            assert -3 <= total <= 100


def test_periodicity():
    for ref in ("radio-a-4", "radio-b-4", "radio-c-4", "radio-a-3"):
        pattern = envs.load_env_config(ref)
        n = pattern.n_channels
        assert all(pattern.occupied(t) == pattern.occupied(t + n) for t in range(201))


def test_bundled_patterns():
    assert envs.load_env_config("radio-a-4").occupancy == (0, 1, 2, 3)
    assert envs.load_env_config("radio-b-4").occupancy == (0, 2, 1, 3)
    assert envs.load_env_config("radio-c-4").occupancy == (3, 1, 0, 2)


@pytest.mark.parametrize("occ", [(0, 0, 1, 2), (0, 1, 2), (0, 1, 2, 4)])
def test_bad_patterns(occ):
    with pytest.raises(ConfigError):
        RadioPattern(4, occ)


def test_pattern_file_unknown_key(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"n_channels": 2, "occupancy": [0, 1], "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        envs.load_env_config(p)


def test_map_file_round_trip(tmp_path):
    p = tmp_path / "lake.txt"
    p.write_text(DEFAULT.to_text())
    assert envs.load_env_config(p).grid == DEFAULT.grid


def test_missing_env_file():
    with pytest.raises(ConfigError):
        envs.load_env_config("/nonexistent/map.txt")


def test_radio_step_before_reset():
    with pytest.raises(UsageError):
        envs.make_env("radio-a-2").step(0)


def test_frozen_lake_score_bound():
    # optimal episode: 5 plain steps then the goal
    env = envs.make_env("frozen-lake-a")
    env.reset()
    total = 0.0
    for a in (DOWN, DOWN, RIGHT, DOWN, RIGHT, RIGHT):
        total += env.step(a).reward
    assert round(total, 10) == 0.95
