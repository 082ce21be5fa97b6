import math

import numpy as np
import pytest

from specdecode.decode import (EXP_CLAMP, _rcd_from_robustness, HCD, RCD, EpisodeResult, Filtering, Unconstrained,
                               decode_step, filter_action, mask_logits_hcd, reweight_logits_rcd,
                               rollout_episode, strategy_from_dict, successor_robustness)
from specdecode.dynamics import ACTIONS, Action, DynamicsConfig, State, step
from specdecode.policy import (PolicyConfig, SamplerMode, SamplerSpec, compute_logits, sample,
                               softmax)
from specdecode.scene import (Box, Scene, SceneGenConfig, build_avoid_spec, build_spec,
                              generate_scene)
from specdecode.stl import OnlineMonitor, parse_formula, robustness

NEG = -math.inf
DYN = DynamicsConfig()

# robot just left of a box, facing it; goal on the far side
BOX = Box(1.0, 2.0, -0.5, 0.5)
WALL_SCENE = Scene(Box(-5, 5, -5, 5), (BOX,), (Box(-5, 5, -5, 5),), State(0.9, 0.0, 0.0), (4.0, 0.0), 0)


def wall_monitor(state=WALL_SCENE.start):
    m = OnlineMonitor(build_avoid_spec(WALL_SCENE))
    m.append(state.as_sample())
    return m


def toy_monitor():
    # safe while x < 1
    m = OnlineMonitor(parse_formula("G x < 1"))
    m.append({"x": 0.0, "z": 0.0, "theta": 0.0})
    return m


# --- strategies -------------------------------------------------------------

def test_strategy_names_and_dicts():
    for s in (Unconstrained(), Filtering(), HCD(), RCD(2.0, 0.5),
              Filtering(Action.ROTATE_RIGHT)):
        assert strategy_from_dict(s.to_dict()) == s
    assert RCD(1.0, 5.0).name == "RCD(alpha=1,beta=5)"
    assert Filtering(Action.DONE).name == "Filtering(Done)"
    with pytest.raises(ValueError):
        strategy_from_dict({"kind": "beam"})


def test_strategy_validation():
    with pytest.raises(ValueError):
        Filtering(Action.MOVE_AHEAD)
    with pytest.raises(ValueError):
        RCD(alpha=0.0)
    with pytest.raises(ValueError):
        RCD(beta=-1.0)


# --- HCD --------------------------------------------------------------------

def test_successor_robustness_does_not_mutate_monitor():
    m = wall_monitor()
    before = (m.running_min, m.steps_seen)
    r = successor_robustness(WALL_SCENE.start, m)
    assert r.shape == (5,)
    assert (m.running_min, m.steps_seen) == before


def test_hcd_masks_only_the_unsafe_action():
    logits = np.array([2.0, 1.0, 0.0, -1.0, -2.0])
    out = mask_logits_hcd(logits, State(0.9, 0.0, 0.0), toy_monitor())
    np.testing.assert_array_equal(out, [NEG, 1.0, 0.0, -1.0, -2.0])
    assert softmax(out)[0] == 0.0


def test_hcd_no_violation_is_bit_exact():
    logits = np.array([0.3, -1.2, 4.5, 0.0, 2.2])
    out = mask_logits_hcd(logits, State(0.0, 0.0, 0.0), toy_monitor())
    assert np.array_equal(out, logits)


def test_hcd_at_box_face():
    s = WALL_SCENE.start
    logits = compute_logits(s, WALL_SCENE)
    out = mask_logits_hcd(logits, s, wall_monitor())
    assert out[Action.MOVE_AHEAD] == NEG
    for a in (Action.MOVE_BACK, Action.ROTATE_LEFT, Action.ROTATE_RIGHT, Action.DONE):
        assert out[a] == logits[a]
    # the geometric reason: the forward successor sits inside the box
    nxt = step(s, Action.MOVE_AHEAD)
    assert BOX.contains(nxt.x, nxt.z)


def test_hcd_all_masked_falls_back_to_best_robustness():
    m = OnlineMonitor(parse_formula("G x < 1"))
    m.append({"x": 0.5})
    # already-past state: every successor keeps the running min below zero
    s = State(1.5, 0.0, 0.0)
    act, trace = decode_step(HCD(), s, WALL_SCENE, m, PolicyConfig(), DYN, SamplerSpec(),
                             np.random.default_rng(0))
    assert trace.all_masked and trace.violated_mask.all()
    assert act == Action(int(np.argmax(trace.robustness_per_action)))


def test_hcd_selection_is_restricted_softmax():
    logits = np.array([1.0, 0.2, -0.3, 0.8, -1.5])
    s = State(0.9, 0.0, 0.0)
    m = toy_monitor()
    masked = mask_logits_hcd(logits, s, m)
    want = softmax(logits[1:])
    rng = np.random.default_rng(5)
    n = 60_000
    counts = np.bincount([sample(masked, SamplerSpec(), rng) for _ in range(n)], minlength=5)
    assert counts[0] == 0
    freq = counts[1:] / n
    sigma = np.sqrt(want * (1 - want) / n)
    assert np.all(np.abs(freq - want) <= 4 * sigma)


# --- RCD --------------------------------------------------------------------

def test_rcd_beta_zero_is_identity():
    logits = np.array([0.3, -1.2, 4.5, 0.0, 2.2])
    for alpha in (0.1, 1.0, 30.0):
        out = reweight_logits_rcd(logits, WALL_SCENE.start, wall_monitor(), DYN, alpha, 0.0)
        assert np.array_equal(out, logits)


def test_rcd_shift_matches_formula():
    s = WALL_SCENE.start
    m = wall_monitor()
    r = successor_robustness(s, m)
    logits = np.zeros(5)
    out = reweight_logits_rcd(logits, s, m, DYN, 2.0, 3.0)
    np.testing.assert_allclose(out, 3.0 * np.exp(np.clip(2.0 * r, -50, 50)), rtol=0, atol=0)


def test_rcd_two_action_example():
    # with logits [0, 0] and r = [1, -1], the safe action wins with p ~ 0.913
    out = _rcd_from_robustness(np.zeros(2), np.array([1.0, -1.0]), 1.0, 1.0)
    np.testing.assert_allclose(out, [math.e, 1 / math.e])
    assert softmax(out)[0] == pytest.approx(1 / (1 + math.exp(1 / math.e - math.e)), abs=1e-12)
    assert softmax(out)[0] == pytest.approx(0.913, abs=5e-4)


def test_rcd_zero_robustness_adds_beta():
    out = _rcd_from_robustness(np.array([0.5]), np.array([0.0]), 1.0, 1.0)
    assert out[0] == 1.5


def test_rcd_clamps_exponent():
    out = _rcd_from_robustness(np.zeros(3), np.array([1e6, -1e6, 1e9]), 10.0, 2.0)
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out, 2.0 * np.exp([EXP_CLAMP, -EXP_CLAMP, EXP_CLAMP]))


def test_rcd_beta_raises_probability_of_safest_action():
    rng = np.random.default_rng(21)
    for _ in range(500):
        logits = rng.normal(0, 2, 5)
        r = rng.normal(0, 1, 5)
        alpha = rng.uniform(0.1, 3)
        best = int(np.argmax(r))
        probs = [softmax(_rcd_from_robustness(logits, r, alpha, b))[best]
                 for b in np.linspace(0, 10, 21)]
        assert all(b >= a - 1e-12 for a, b in zip(probs, probs[1:]))


# --- filtering --------------------------------------------------------------

def test_filter_passes_safe_samples_through():
    logits = np.array([NEG, NEG, NEG, 0.0, NEG])
    got = filter_action(logits, State(0.9, 0.0, 0.0), toy_monitor(), DYN, Action.ROTATE_LEFT,
                        SamplerSpec(), np.random.default_rng(0))
    assert got == Action.ROTATE_RIGHT


def test_filter_substitutes_default():
    logits = np.array([0.0, NEG, NEG, NEG, NEG])
    got = filter_action(logits, State(0.9, 0.0, 0.0), toy_monitor(), DYN, Action.ROTATE_LEFT,
                        SamplerSpec(), np.random.default_rng(0))
    assert got == Action.ROTATE_LEFT


def test_fallback_preserves_running_min():
    m = wall_monitor()
    s = WALL_SCENE.start
    assert m.peek(step(s, Action.ROTATE_LEFT).as_sample()) == m.running_min


def test_filtering_trace_records_proposal():
    m = wall_monitor()
    rng = np.random.default_rng(0)
    seen = set()
    for _ in range(50):
        act, tr = decode_step(Filtering(), WALL_SCENE.start, WALL_SCENE, m, PolicyConfig(), DYN,
                              SamplerSpec(SamplerMode.GREEDY), rng)
        seen.add((tr.proposed, act))
    assert seen == {(Action.MOVE_AHEAD, Action.ROTATE_LEFT)}


# --- decode_step ------------------------------------------------------------

def test_unconstrained_trace_is_identity():
    m = wall_monitor()
    act, tr = decode_step(Unconstrained(), WALL_SCENE.start, WALL_SCENE, m, PolicyConfig(), DYN,
                          SamplerSpec(), np.random.default_rng(3))
    assert np.array_equal(tr.adjusted_logits, tr.raw_logits)
    assert tr.chosen == act == tr.proposed
    for v in (tr.raw_logits, tr.adjusted_logits, tr.robustness_per_action, tr.violated_mask):
        assert len(v) == len(ACTIONS)
    assert tr.violated_mask[Action.MOVE_AHEAD]


def test_rcd_beta_zero_draws_like_unconstrained():
    m = wall_monitor()
    s = WALL_SCENE.start
    n = 100_000
    ra, rb = np.random.default_rng(99), np.random.default_rng(99)
    a = np.empty(n, dtype=int)
    b = np.empty(n, dtype=int)
    for i in range(n):
        a[i] = decode_step(RCD(1.0, 0.0), s, WALL_SCENE, m, PolicyConfig(), DYN, SamplerSpec(), ra)[0]
        b[i] = decode_step(Unconstrained(), s, WALL_SCENE, m, PolicyConfig(), DYN, SamplerSpec(), rb)[0]
    assert np.array_equal(a, b)
    p = softmax(compute_logits(s, WALL_SCENE))
    assert np.allclose(np.bincount(a, minlength=5) / n, p, atol=0.01)


# --- rollouts ---------------------------------------------------------------

def test_vacuous_spec_rollout_satisfied():
    sc = generate_scene(SceneGenConfig(n_avoid=0, conflict_bias=False), 4)
    res = rollout_episode(Unconstrained(), sc, build_avoid_spec(sc), spec_kind="avoid",
                          rng=np.random.default_rng(0))
    assert res.stl_satisfied and res.min_robustness == 1e9


def test_truncated_rollout():
    sc = generate_scene(SceneGenConfig(), 4)
    res = rollout_episode(Unconstrained(), sc, build_avoid_spec(sc), max_steps=3,
                          rng=np.random.default_rng(0))
    assert res.steps == 3 and len(res.states) == 4 and len(res.actions) == 3
    assert not res.success
    with pytest.raises(ValueError):
        rollout_episode(Unconstrained(), sc, build_avoid_spec(sc), max_steps=0)


def test_rollout_verdict_matches_batch_robustness():
    sc = generate_scene(SceneGenConfig(), 8)
    spec = build_spec(sc, "geofence")
    res = rollout_episode(Unconstrained(), sc, spec, spec_kind="geofence",
                          rng=np.random.default_rng(1))
    rho = robustness(spec, res.trajectory())
    assert res.min_robustness == rho
    assert res.stl_satisfied == (rho >= 0)


def test_rollout_episode_ends_with_done_when_successful():
    for seed in range(10):
        sc = generate_scene(SceneGenConfig(), seed)
        res = rollout_episode(HCD(), sc, build_avoid_spec(sc), rng=np.random.default_rng(seed))
        if res.success:
            assert res.actions[-1] == Action.DONE
            assert sc.goal_distance(res.states[-1]) <= 1.0


def test_traces_are_kept_on_request():
    sc = generate_scene(SceneGenConfig(), 2)
    res = rollout_episode(RCD(), sc, build_avoid_spec(sc), max_steps=15, keep_traces=True,
                          rng=np.random.default_rng(0))
    assert len(res.traces) == res.steps
    assert [t.chosen for t in res.traces] == res.actions
    assert res.monitor_calls == res.steps and res.monitor_seconds > 0


@pytest.mark.parametrize("strategy", [HCD(), Filtering(), Filtering(Action.ROTATE_RIGHT)])
@pytest.mark.parametrize("kind", ["avoid", "geofence"])
def test_hard_strategies_never_violate(strategy, kind):
    for seed in range(40):
        sc = generate_scene(SceneGenConfig(), seed)
        res = rollout_episode(strategy, sc, build_spec(sc, kind), spec_kind=kind,
                              rng=np.random.default_rng([0, seed]))
        assert res.stl_satisfied and res.min_robustness >= 0
        assert not res.flagged_infeasible


def test_hcd_chosen_actions_never_masked():
    for seed in range(30):
        sc = generate_scene(SceneGenConfig(), seed)
        res = rollout_episode(HCD(), sc, build_avoid_spec(sc), keep_traces=True,
                              rng=np.random.default_rng(seed))
        for tr in res.traces:
            if np.isfinite(tr.adjusted_logits).any():
                assert np.isfinite(tr.adjusted_logits[tr.chosen])


def test_noisy_rollout_is_deterministic_and_differs_from_exact():
    sc = generate_scene(SceneGenConfig(), 6)
    spec = build_avoid_spec(sc)
    noisy = DynamicsConfig(noise_translation_sigma=0.01, noise_yaw_sigma=math.radians(1))

    def run(dyn):
        return rollout_episode(HCD(), sc, spec, dyn_cfg=dyn, rng=np.random.default_rng(0),
                               noise_rng=np.random.default_rng(1))

    assert run(noisy) == run(noisy)
    assert run(noisy).states != run(DYN).states


def test_episode_dict_round_trip():
    sc = generate_scene(SceneGenConfig(), 2)
    res = rollout_episode(RCD(), sc, build_avoid_spec(sc), rng=np.random.default_rng(0))
    assert EpisodeResult.from_dict(res.to_dict()) == res
