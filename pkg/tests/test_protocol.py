import dataclasses
import json

import pytest
from hypothesis import given, settings, strategies as st

from groupkey import keytree as kt
from groupkey.channel import ChannelModel
from groupkey.modmath import GroupParams
from groupkey.protocol import (
    ConfigError,
    Event,
    FrameError,
    Message,
    SimConfig,
    StaleViewError,
    audit_secrecy,
    config_from_dict,
    frame_payload,
    init_member,
    load_config,
    member_handle,
    parse_frame,
    random_events,
    replay_candidates,
    run_scenario,
)
from groupkey.seeding import derive_seed

P64 = GroupParams(2**64 - 59, 5)
P32 = GroupParams(2**32 - 5, 3)
FIG3_LAYOUT = {"M1": 7, "M2": 8, "M3": 9, "M4": 10, "M7": 5, "M5": 13, "M6": 14}


# -- framing -------------------------------------------------------------------------


@given(
    st.lists(st.tuples(st.integers(0, 2**20), st.integers(0, 2**130)), max_size=12),
    st.sampled_from([1, 8, 16]),
)
@settings(max_examples=150, deadline=None)
def test_frame_round_trip(entries, block):
    bits = frame_payload(entries, block)
    assert len(bits) % block == 0
    assert parse_frame(bits, block) == entries


def test_frame_rejects_truncation_and_trailing_bits():
    bits = frame_payload([(5, 1234567)], 8)
    with pytest.raises(FrameError):
        parse_frame(bits[:-9], 8)
    with pytest.raises(FrameError):
        parse_frame(bits + [0] * 8, 8)
    with pytest.raises(FrameError):
        frame_payload([(-1, 3)])


def test_join_request_carries_one_key():
    Message("JoinRequest", "M8", ((12, 7),))
    with pytest.raises(ValueError):
        Message("JoinRequest", "M8", ((12, 7), (11, 3)))


# -- member_handle -------------------------------------------------------------------


@pytest.fixture
def fig3_join():
    secrets = {m: kt.gen_secret_key(P64, derive_seed(3, m)) for m in FIG3_LAYOUT}
    tree = kt.KeyTree.build(P64, FIG3_LAYOUT, secrets)
    s8 = kt.gen_secret_key(P64, 88)
    res = kt.join(tree, tree.public_key(s8), "M8", seed=8, new_member_secret=s8)
    states = {
        m: init_member(m, v, secrets[m], tree.publics(), FIG3_LAYOUT, P64) for m, v in FIG3_LAYOUT.items()
    }
    msg = Message("RekeyBroadcast", res.support, res.broadcast_publics, "join", "M8")
    return tree, res, states, msg


def test_initial_states_agree(fig3_join):
    tree, _, states, _ = fig3_join
    assert {s.current_group_key for s in states.values()} == {tree.group_key}


def test_member_outside_changed_subtree_recomputes_root_only(fig3_join):
    _, res, states, msg = fig3_join
    for m in ("M1", "M2", "M3", "M4"):
        out = member_handle(states[m], msg, P64)
        assert out.recomputed == (0,)
        assert out.current_group_key == res.new_group_key


def test_member_beside_the_join_recomputes_two_levels(fig3_join):
    _, res, states, msg = fig3_join
    for m in ("M5", "M6"):
        out = member_handle(states[m], msg, P64)
        assert out.recomputed == (2, 0)
        assert out.current_group_key == res.new_group_key


def test_repeated_publics_change_nothing(fig3_join):
    tree, _, states, _ = fig3_join
    same = Message("RekeyBroadcast", "M7", ((2, tree.nodes[2].public),))
    out = member_handle(states["M1"], same, P64)
    assert out.recomputed == ()
    assert out.current_group_key == states["M1"].current_group_key


def test_payload_outside_view_is_stale(fig3_join):
    _, _, states, _ = fig3_join
    with pytest.raises(StaleViewError):
        member_handle(states["M1"], Message("RekeyBroadcast", "M7", ((40, 9),)), P64)
    with pytest.raises(StaleViewError):
        member_handle(states["M1"], Message("RekeyBroadcast", "M7", ((2, 0),)), P64)


# -- scenarios ----------------------------------------------------------------------


def fig3_config(**kw):
    base = dict(params=P64, seed=3, layout=FIG3_LAYOUT, events=(Event("join", "M8"), Event("leave", "M8")),
                name="fig3")
    base.update(kw)
    return SimConfig(**base)


def test_fig3_scenario():
    report = run_scenario(fig3_config())
    init, join, leave = report.events
    assert init.converged and init.member_count == 7
    assert join.updated_nodes == (5, 2, 0) and join.broadcast_nodes == (5, 2)
    assert join.support == "M7" and join.member_count == 8 and join.converged
    assert leave.updated_nodes == (5, 2, 0) and sorted(leave.broadcast_nodes) == [2, 5]
    assert leave.member_count == 7 and leave.converged
    assert len({init.group_key, join.group_key, leave.group_key}) == 3
    assert report.ok


def test_empty_event_list():
    report = run_scenario(SimConfig(P64, 1, members=("a", "b", "c")))
    assert len(report.events) == 1 and report.events[0].converged and report.ok
    assert audit_secrecy(report).checks == () and audit_secrecy(report).passed


def test_noiseless_random_events_with_codec():
    members = tuple(f"M{i}" for i in range(1, 17))
    cfg = SimConfig(P64, 16, members=members, events=tuple(random_events(members, 30, 16)))
    report = run_scenario(cfg)
    assert report.ok
    assert all(e.converged for e in report.events)
    assert sum(e.correction_trials for e in report.events) == 0
    assert sum(e.flips for e in report.events) == 0
    # as many trials as decoded blocks
    assert all(e.trials > 0 for e in report.events[1:])


def test_single_flip_per_block_keeps_convergence():
    members = tuple(f"M{i}" for i in range(1, 13))
    cfg = SimConfig(P32, 5, members=members, events=tuple(random_events(members, 12, 5)),
                    channel=ChannelModel("single", seed=77))
    report = run_scenario(cfg)
    assert report.ok
    assert sum(e.correction_trials for e in report.events) > 0


def test_noisy_channel_without_codec_is_recorded_not_raised():
    members = tuple(f"M{i}" for i in range(1, 9))
    cfg = SimConfig(P32, 5, members=members, events=tuple(random_events(members, 8, 5)),
                    channel=ChannelModel("bsc", "0.2", seed=1), codec=False)
    report = run_scenario(cfg)
    assert report.delivery_failures > 0 and not report.ok
    reasons = {f.reason for e in report.events for f in e.failures}
    assert reasons <= {"frame", "stale-view", "diverged", "decode"}
    # failures never exceed the listening members
    assert all(len(e.failures) <= e.member_count for e in report.events)


def test_report_is_deterministic(tmp_path):
    members = tuple(f"M{i}" for i in range(1, 9))
    cfg = SimConfig(P32, 9, members=members, events=tuple(random_events(members, 10, 9)),
                    channel=ChannelModel("bsc", "0.05", seed=4), name="det")
    a, b = run_scenario(cfg), run_scenario(cfg)
    assert a.to_json() == b.to_json() and a.to_csv() == b.to_csv()
    j, c = a.write(tmp_path)
    assert json.loads(j.read_text())["channel"]["algorithm"].startswith("mt19937")
    assert c.read_text().splitlines()[0] == "event,kind,member,members,converged,trials,correction_trials,failures"


def test_different_seed_different_keys():
    a = run_scenario(fig3_config())
    b = run_scenario(fig3_config(seed=4))
    assert a.events[-1].group_key != b.events[-1].group_key


# -- secrecy audit ------------------------------------------------------------------


def test_audit_join_and_leave():
    report = run_scenario(fig3_config(params=P32))
    result = audit_secrecy(report)
    assert [(c.kind, c.member) for c in result.checks] == [("join", "M8"), ("leave", "M8")]
    assert result.passed


def test_replay_oracle_finds_a_key_it_should():
    # sanity check of the oracle: a current member's knowledge does reach the group key
    report = run_scenario(fig3_config(params=P32, events=(Event("join", "M8"),)))
    case = report.audit[0]
    tree_key = report.events[-1].group_key
    assert tree_key in replay_candidates(P32, case.secrets, {}, "etf")
    assert case.target not in replay_candidates(P32, case.secrets, case.publics, "etf")


def test_audit_detects_a_planted_leak():
    report = run_scenario(fig3_config(params=P32))
    leak = dataclasses.replace(report.audit[1], secrets=report.audit[1].secrets + (report.audit[1].target,))
    bad = dataclasses.replace(report, audit=(report.audit[0], leak))
    result = audit_secrecy(bad)
    assert not result.passed and [c.passed for c in result.checks] == [True, False]


@given(st.integers(0, 2**32), st.integers(3, 12))
@settings(max_examples=10, deadline=None)
def test_audit_random_scenarios(seed, n):
    members = tuple(f"M{i}" for i in range(n))
    cfg = SimConfig(P32, seed, members=members, events=tuple(random_events(members, 6, seed)))
    report = run_scenario(cfg)
    assert report.ok and audit_secrecy(report).passed


# -- configuration --------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(P32, 1, members=("a", "b"), events=(Event("leave", "a"), Event("leave", "b")))
    with pytest.raises(ConfigError):
        SimConfig(P32, 1, members=("a",), events=(Event("join", "a"),))
    with pytest.raises(ConfigError):
        SimConfig(P32, 1, members=("a", "b"), events=(Event("leave", "c"),))
    with pytest.raises(ConfigError):
        SimConfig(P32, 1)
    with pytest.raises(ConfigError):
        SimConfig(P32, 1, members=("a", "a"))


def test_config_from_dict():
    cfg = config_from_dict({
        "params": {"p": 23, "y": 5}, "seed": 2, "members": ["a", "b"],
        "events": [{"join": "c"}, {"leave": "a"}],
        "channel": {"mode": "bsc", "probability": "0.1", "seed": 3}, "codec": "off",
    })
    assert cfg.events == (Event("join", "c"), Event("leave", "a"))
    assert not cfg.codec and str(cfg.channel.flip_probability) == "1/10"
    rnd = config_from_dict({"params": {"p": 23, "y": 5}, "members": ["a", "b"], "random_events": {"count": 5, "seed": 1}})
    assert len(rnd.events) == 5
    for bad in ({}, {"params": {"p": 21, "y": 5}, "members": ["a"]},
                {"params": {"p": 23, "y": 5}, "members": ["a"], "codec": "maybe"},
                {"params": {"p": 23, "y": 5}, "members": ["a"], "events": [{"join": "b", "leave": "a"}]}):
        with pytest.raises(ConfigError):
            config_from_dict(bad)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_random_events_never_drop_below_two():
    members = ["a", "b", "c"]
    current = set(members)
    for ev in random_events(members, 200, 1):
        if ev.kind == "join":
            current.add(ev.member)
        else:
            current.discard(ev.member)
        assert len(current) >= 2
