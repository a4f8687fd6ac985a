import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from acnbounds.core import (DELIVER, DROP, FORWARD, NO_COMM, RANDOM_PERM,
                            SEND, AdversaryCapability, Communication,
                            ConfigError, ProtocolParams, ResourceLimitError,
                            filter_trace, make_batch, relay_loc)
from acnbounds.notions import ScenarioPair, parse_notion
from acnbounds.protocols import (DroppingSession, ProtocolKind, build_trace,
                                 enumerate_outcomes, run_protocol,
                                 sample_outcome)

SO = parse_notion("SO")


def _pair(n, mode="simultaneous", rows=None):
    if rows is None:
        b0 = make_batch([Communication(0, n - 1, 0)], mode)
        b1 = make_batch([Communication(1, n - 1, 0)], mode)
    else:
        b0, b1 = (make_batch(r, mode) for r in rows)
    return ScenarioPair(b0, b1, SO)


def _events(kind, pair, b=0, seed=1, cap=None):
    rng = random.Random(seed)
    outcome = sample_outcome(kind, pair, b, rng)
    return build_trace(kind, pair, b, outcome, cap).events


def test_variant_validation():
    with pytest.raises(ConfigError):
        ProtocolKind("carrier-pigeon", ProtocolParams(n=2, l_max=1))
    with pytest.raises(ConfigError):
        ProtocolKind("onion-path", ProtocolParams(n=2, l_max=3, relays=1,
                                                  l_exp=3))
    with pytest.raises(ConfigError):
        ProtocolKind("threshold-mix", ProtocolParams(n=2, l_max=2))
    with pytest.raises(ConfigError):
        ProtocolKind("dropping-model", ProtocolParams(n=2, l_max=1, relays=1,
                                                      copies=2))


def test_enumeration_probabilities_sum_to_one():
    cases = [
        ProtocolKind("trilemma-unsync", ProtocolParams(n=2, l_max=2, beta=0.25)),
        ProtocolKind("trilemma-sync", ProtocolParams(n=4, l_max=3, beta=0.5)),
        ProtocolKind("onion-path", ProtocolParams(n=2, l_max=2, beta=0.5,
                                                  relays=3, l_exp=2)),
        ProtocolKind("dropping-model", ProtocolParams(n=2, l_max=1, relays=4,
                                                      copies=2)),
        ProtocolKind("dcnet-round", ProtocolParams(n=3, l_max=1)),
        ProtocolKind("broadcast-full-dummy", ProtocolParams(n=3, l_max=2)),
    ]
    for kind in cases:
        pair = _pair(kind.params.n)
        for b in (0, 1):
            outs = enumerate_outcomes(kind, pair, b)
            total = sum(p for p, _ in outs)
            assert total == Fraction(1), kind.variant
            assert all(p > 0 for p, _ in outs)


def test_sampled_outcomes_live_in_the_enumerated_support():
    kind = ProtocolKind("trilemma-unsync", ProtocolParams(n=2, l_max=2,
                                                          beta=0.5))
    pair = _pair(2)
    support = {o for _, o in enumerate_outcomes(kind, pair, 0)}
    rng = random.Random(0)
    for _ in range(50):
        assert sample_outcome(kind, pair, 0, rng) in support


def test_trace_build_is_deterministic():
    kind = ProtocolKind("trilemma-sync", ProtocolParams(n=5, l_max=2,
                                                        beta=0.4))
    pair = _pair(5)
    rng = random.Random(3)
    outcome = sample_outcome(kind, pair, 0, rng)
    assert build_trace(kind, pair, 0, outcome) == build_trace(kind, pair, 0,
                                                              outcome)


def test_packet_ids_are_dense_and_first_mention_ordered():
    kind = ProtocolKind("onion-path", ProtocolParams(n=3, l_max=3, beta=0.3,
                                                     relays=3, l_exp=3))
    evs = _events(kind, _pair(3), seed=7)
    seen = []
    for e in evs:
        for q in (e.packet, e.in_packet):
            if q is not None and q not in seen:
                seen.append(q)
    assert seen == list(range(len(seen)))


def test_direct_delivery_keeps_the_packet_id():
    kind = ProtocolKind("trilemma-unsync", ProtocolParams(n=2, l_max=1))
    evs = _events(kind, _pair(2), b=1)
    send = next(e for e in evs if e.kind == SEND and e.is_real)
    deliver = next(e for e in evs if e.kind == DELIVER)
    assert deliver.packet == send.packet
    assert deliver.round == send.round


def test_longer_latency_rerandomizes_the_id():
    kind = ProtocolKind("trilemma-unsync", ProtocolParams(n=2, l_max=3))
    evs = _events(kind, _pair(2))
    send = next(e for e in evs if e.kind == SEND)
    deliver = next(e for e in evs if e.kind == DELIVER)
    assert deliver.packet != send.packet
    assert 1 <= deliver.round - send.round <= 2


def test_sync_cover_cohort_size():
    n, beta = 7, 0.4
    kind = ProtocolKind("trilemma-sync", ProtocolParams(n=n, l_max=2,
                                                        beta=beta))
    evs = _events(kind, _pair(n), seed=11)
    sends = [e for e in evs if e.kind == SEND]
    # exactly one real sender plus floor(beta*n) synchronized cover sends
    assert len(sends) == 1 + int(beta * n)
    assert len({e.location for e in sends}) == len(sends)


def test_threshold_mix_flushes_in_one_batch():
    params = ProtocolParams(n=4, l_max=3, threshold=2)
    kind = ProtocolKind("threshold-mix", params)
    rows = ([Communication(0, 3, 0), Communication(1, 3, 1)],
            [Communication(1, 3, 0), Communication(0, 3, 1)])
    pair = _pair(4, rows=rows)
    evs = _events(kind, pair)
    delivers = [e for e in evs if e.kind == DELIVER]
    assert len(delivers) == 2
    assert len({e.round for e in delivers}) == 1
    with pytest.raises(ConfigError):
        build_trace(ProtocolKind("threshold-mix",
                                 ProtocolParams(n=4, l_max=3, threshold=3)),
                    pair, 0, ((None,)))


def test_threshold_mix_holds_messages_until_the_quota_arrives():
    # arrivals land in three consecutive rounds; nothing leaves until the
    # third one, then everything flushes together
    params = ProtocolParams(n=4, l_max=2, threshold=3)
    kind = ProtocolKind("threshold-mix", params)
    rows = ([Communication(0, 3, 0), Communication(1, 3, 1),
             Communication(2, 3, 2)],
            [Communication(1, 3, 0), Communication(0, 3, 1),
             Communication(2, 3, 2)])
    pair = _pair(4, mode=RANDOM_PERM, rows=rows)
    evs = _events(kind, pair)
    send_rounds = sorted(e.round for e in evs if e.kind == SEND)
    assert len(send_rounds) == 3 and len(set(send_rounds)) == 3
    delivers = [e for e in evs if e.kind == DELIVER]
    assert len(delivers) == 3
    assert {e.round for e in delivers} == {max(send_rounds) + 1}


def test_broadcast_volume_matches_the_traffic_relation():
    from acnbounds.bounds import traffic_relation
    from acnbounds.core import traffic_stats
    n, r = 4, 5
    rows = tuple([Communication(s, 3, 100 + j) for j, s in
                  enumerate((first, 1, 2, 0, 1))] for first in (0, 1))
    pair = _pair(n, rows=rows)
    kind = ProtocolKind("broadcast-full-dummy",
                        ProtocolParams(n=n, l_max=1, rounds=r))
    trace = build_trace(kind, pair, 0, (None,))
    stats = traffic_stats(trace)
    assert stats.com == n * r == 20
    assert stats.out == 5
    # everyone sends every round, so the dummy rate seen on the wire is
    # one minus the real rate
    beta = (n - stats.out / r) / n
    assert traffic_relation(beta, n, r, stats.out) == pytest.approx(stats.com)


def test_everyone_transmits_every_round_in_shared_send_models():
    for variant in ("dcnet-round", "broadcast-full-dummy"):
        kind = ProtocolKind(variant, ProtocolParams(n=3, l_max=2))
        evs = _events(kind, _pair(3))
        rounds = {e.round for e in evs if e.kind == SEND}
        for t in rounds:
            locs = sorted(e.location for e in evs
                          if e.kind == SEND and e.round == t)
            assert locs == [0, 1, 2]


def test_onion_forward_chain_links_up():
    kind = ProtocolKind("onion-path", ProtocolParams(n=2, l_max=3, relays=4,
                                                     l_exp=3))
    evs = _events(kind, _pair(2))
    deliver = next(e for e in evs if e.kind == DELIVER)
    hops = 0
    cur = deliver.in_packet
    by_packet = {e.packet: e for e in evs if e.kind != DELIVER}
    while True:
        e = by_packet[cur]
        if e.kind == SEND:
            break
        assert e.kind == FORWARD
        hops += 1
        cur = e.in_packet
    assert hops == kind.params.l_exp - 1
    assert e.location == 0


def test_dropping_link_control_kills_everything():
    params = ProtocolParams(n=3, l_max=1, relays=4, copies=2)
    kind = ProtocolKind("dropping-model", params)
    pair = _pair(3)
    cap = AdversaryCapability(observed_senders=frozenset(range(3)),
                              receiver_corrupted=True, active_drop=True,
                              knows_expected_reception=True)
    evs = _events(kind, pair, b=1, cap=cap)
    assert sum(1 for e in evs if e.kind == DROP) == 2
    assert not any(e.kind == DELIVER for e in evs)
    # scenario 0's sender is not the target, so its copies pass
    evs0 = _events(kind, pair, b=0, cap=cap)
    assert any(e.kind == DELIVER for e in evs0)


def test_dropping_relay_control_needs_full_coverage():
    params = ProtocolParams(n=3, l_max=1, relays=4, copies=2)
    kind = ProtocolKind("dropping-model", params)
    pair = _pair(3)
    cap = AdversaryCapability(observed_senders=frozenset(range(3)),
                              receiver_corrupted=True, active_drop=True,
                              c_a=1, knows_expected_reception=True)
    for _, outcome in enumerate_outcomes(kind, pair, 1):
        evs = build_trace(kind, pair, 1, outcome, cap).events
        # one controlled relay can kill at most one of the two copies
        assert any(e.kind == DELIVER for e in evs)


def test_interactive_session_matches_the_one_shot_policy():
    from acnbounds.adversaries import dropping_actions
    params = ProtocolParams(n=3, l_max=1, relays=4, copies=2)
    kind = ProtocolKind("dropping-model", params)
    pair = _pair(3)
    cap = AdversaryCapability(observed_senders=frozenset(range(3)),
                              receiver_corrupted=True, active_drop=True,
                              c_a=2, knows_expected_reception=True)
    for _, outcome in enumerate_outcomes(kind, pair, 1):
        oneshot = filter_trace(build_trace(kind, pair, 1, outcome, cap), cap)
        session = DroppingSession(kind, pair, 1, outcome, cap)
        seen = []
        actions = []
        for _ in range(3):
            new = session.step(actions)
            seen.extend(new)
            actions = dropping_actions(seen, pair, cap, params)
        assert (any(e.kind == DELIVER for e in seen)
                == any(e.kind == DELIVER for e in oneshot.events))
        assert (sum(1 for e in seen if e.kind == DROP)
                == sum(1 for e in oneshot.events if e.kind == DROP))


def test_interactive_session_agrees_on_the_integrated_link_cut():
    from acnbounds.adversaries import dropping_actions
    params = ProtocolParams(n=3, l_max=1, relays=4, copies=1,
                            integrated=True)
    kind = ProtocolKind("dropping-model", params)
    pair = _pair(3)
    cap = AdversaryCapability(observed_senders=frozenset(range(3)),
                              receiver_corrupted=True, active_drop=True,
                              c_a=0, knows_expected_reception=True)
    for b in (0, 1):
        for _, outcome in enumerate_outcomes(kind, pair, b):
            oneshot = filter_trace(build_trace(kind, pair, b, outcome, cap),
                                   cap)
            session = DroppingSession(kind, pair, b, outcome, cap)
            seen = []
            actions = []
            for _ in range(3):
                seen.extend(session.step(actions))
                actions = dropping_actions(seen, pair, cap, params)
            assert (any(e.kind == DELIVER for e in seen)
                    == any(e.kind == DELIVER for e in oneshot.events)), (b, outcome)
            assert (sum(1 for e in seen if e.kind == DROP)
                    == sum(1 for e in oneshot.events if e.kind == DROP)), (b, outcome)


def test_interactive_session_rejects_uncontrolled_drops():
    from acnbounds.core import CapabilityError
    params = ProtocolParams(n=3, l_max=1, relays=4, copies=1)
    kind = ProtocolKind("dropping-model", params)
    pair = _pair(3)
    cap = AdversaryCapability(observed_senders=frozenset({1}),
                              receiver_corrupted=True, active_drop=True,
                              c_a=1, knows_expected_reception=True)
    outcome = enumerate_outcomes(kind, pair, 1)[0][1]
    session = DroppingSession(kind, pair, 1, outcome, cap)
    sends = session.step()
    with pytest.raises(CapabilityError):
        session.step([(sends[0].packet, relay_loc(3))])


def test_random_permutation_mode_spreads_the_schedule():
    params = ProtocolParams(n=4, l_max=2)
    kind = ProtocolKind("trilemma-unsync", params)
    rows = ([Communication(0, 3, 0), Communication(1, 3, 1)],
            [Communication(1, 3, 0), Communication(0, 3, 1)])
    pair = _pair(4, mode=RANDOM_PERM, rows=rows)
    outs = enumerate_outcomes(kind, pair, 0)
    perms = {o[0] for _, o in outs}
    assert perms == {(0, 1), (1, 0)}
    evs = build_trace(kind, pair, 0, outs[0][1]).events
    send_rounds = sorted(e.round for e in evs if e.kind == SEND and e.is_real)
    assert send_rounds == [2, 3]


def test_short_horizon_is_rejected():
    params = ProtocolParams(n=2, l_max=3, rounds=2)
    kind = ProtocolKind("trilemma-unsync", params)
    with pytest.raises(ConfigError):
        sample_outcome(kind, _pair(2), 0, random.Random(0))


def test_enumeration_guard_trips_on_large_spaces():
    kind = ProtocolKind("trilemma-unsync", ProtocolParams(n=10, l_max=3,
                                                          beta=0.5))
    with pytest.raises(ResourceLimitError):
        enumerate_outcomes(kind, _pair(10), 0)


def test_run_protocol_applies_the_filter():
    kind = ProtocolKind("trilemma-unsync", ProtocolParams(n=3, l_max=2,
                                                          beta=0.5))
    cap = AdversaryCapability(observed_senders=frozenset({0}))
    trace = run_protocol(kind, _pair(3), 0, cap, seed=5)
    assert all(e.kind == SEND and e.location == 0 for e in trace.events)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 3), l_max=st.integers(1, 2),
       beta=st.sampled_from([0.0, 0.25, 0.5, 1.0]), b=st.integers(0, 1))
def test_unsync_enumeration_is_a_distribution(n, l_max, beta, b):
    kind = ProtocolKind("trilemma-unsync",
                        ProtocolParams(n=n, l_max=l_max, beta=beta))
    outs = enumerate_outcomes(kind, _pair(n), b)
    assert sum(p for p, _ in outs) == Fraction(1)
    assert len({o for _, o in outs}) == len(outs)
