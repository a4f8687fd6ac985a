import pytest
from hypothesis import given, strategies as st

from acnbounds.core import (DELIVER, DROP, FORWARD, NO_COMM, SEND,
                            AdversaryCapability, Batch, Communication,
                            ObservationEvent, ObservationTrace,
                            ProtocolParams, filter_trace, make_batch,
                            receiver_counts, relay_loc, sender_counts,
                            traffic_stats)


def test_no_comm_is_singleton_with_plain_repr():
    assert repr(NO_COMM) == "NO_COMM"
    assert NO_COMM is not None


def test_make_batch_validates():
    b = make_batch([Communication(0, 1, 0), NO_COMM])
    assert len(b.rows) == 2
    with pytest.raises(ValueError):
        make_batch([])
    with pytest.raises(ValueError):
        make_batch([Communication(0, 1, 0)], mode="shuffled")
    with pytest.raises(ValueError):
        make_batch([(0, 1, 0)])


def test_counts_skip_placeholder_rows():
    b = make_batch([Communication(0, 2, 0), Communication(0, 1, 1), NO_COMM])
    assert sender_counts(b) == {0: 2}
    assert receiver_counts(b) == {2: 1, 1: 1}


def test_params_validation():
    p = ProtocolParams(n=4, l_max=3, beta=0.25, p_real=0.25)
    assert p.p == 0.5
    assert p.l_exp == 3  # defaults to the latency cap
    with pytest.raises(ValueError):
        ProtocolParams(n=1, l_max=2)
    with pytest.raises(ValueError):
        ProtocolParams(n=4, l_max=0)
    with pytest.raises(ValueError):
        ProtocolParams(n=4, l_max=2, beta=0.8, p_real=0.4)
    with pytest.raises(ValueError):
        ProtocolParams(n=4, l_max=2, l_exp=5)


def test_capability_requires_a_vantage_point_for_drops():
    with pytest.raises(ValueError):
        AdversaryCapability(active_drop=True)
    AdversaryCapability(active_drop=True, c_a=1)
    AdversaryCapability(active_drop=True, observed_senders={3})


def test_relay_locations_are_negative():
    assert relay_loc(0) == -1
    assert relay_loc(2) == -3


def _sample_trace():
    return ObservationTrace.from_events([
        ObservationEvent(SEND, 1, 0, 0, is_real=True, msg=7),
        ObservationEvent(SEND, 1, 1, 1, is_real=False),
        ObservationEvent(FORWARD, 2, relay_loc(0), 2, in_packet=0, origin=0),
        ObservationEvent(FORWARD, 2, relay_loc(1), 3, in_packet=1, origin=1),
        ObservationEvent(DROP, 2, relay_loc(0), 4),
        ObservationEvent(DELIVER, 3, 2, 5, is_real=True, msg=7),
    ])


def test_filter_masks_send_payloads():
    cap = AdversaryCapability(observed_senders={0})
    got = filter_trace(_sample_trace(), cap)
    assert [e.kind for e in got.events] == [SEND]
    e = got.events[0]
    assert e.location == 0 and e.is_real is None and e.msg is None


def test_filter_gates_each_event_kind():
    cap = AdversaryCapability(observed_senders={0, 1}, receiver_corrupted=True,
                              c_p=1, c_a=1, active_drop=True)
    got = filter_trace(_sample_trace(), cap)
    kinds = [e.kind for e in got.events]
    assert kinds == [SEND, SEND, FORWARD, DROP, DELIVER]
    # only the first relay is compromised
    assert all(e.location == relay_loc(0) for e in got.events
               if e.kind == FORWARD)
    # the receiver keeps its plaintext view
    assert got.events[-1].msg == 7 and got.events[-1].is_real is True


def test_filter_is_idempotent():
    cap = AdversaryCapability(observed_senders={0, 1}, receiver_corrupted=True,
                              c_p=1)
    once = filter_trace(_sample_trace(), cap)
    assert filter_trace(once, cap) == once


def test_blind_adversary_sees_nothing():
    got = filter_trace(_sample_trace(), AdversaryCapability())
    assert got.events == ()


def test_traffic_stats():
    stats = traffic_stats(_sample_trace())
    assert stats.L == {0: 1, 1: 1}
    assert stats.out == 1
    assert stats.com == 2


def test_events_sort_by_round_then_kind():
    t = _sample_trace()
    rounds = [e.round for e in t.events]
    assert rounds == sorted(rounds)
    assert t.events[-1].kind == DELIVER


@given(st.lists(st.tuples(st.integers(1, 5), st.integers(0, 3),
                          st.integers(0, 9)), min_size=1, max_size=20))
def test_from_events_is_order_insensitive(specs):
    evs = [ObservationEvent(SEND, r, u, q) for (r, u, q) in specs]
    a = ObservationTrace.from_events(evs)
    b = ObservationTrace.from_events(list(reversed(evs)))
    assert a == b


@given(st.sets(st.integers(0, 5)), st.booleans(), st.integers(0, 3),
       st.integers(0, 3))
def test_filter_never_invents_events(observed, recv, c_p, c_a):
    cap = AdversaryCapability(observed_senders=observed,
                              receiver_corrupted=recv, c_p=c_p, c_a=c_a)
    full = _sample_trace()
    got = filter_trace(full, cap)
    for e in got.events:
        stripped = e._replace(is_real=None, msg=None)
        originals = [o for o in full.events
                     if o._replace(is_real=None, msg=None) == stripped]
        assert originals
