"""Concrete attacks that turn an observed trace into a guess.

Every attack is a pure decision rule over the filtered trace: it returns
0 or 1 when the observation pins down the scenario, and None when the view
is consistent with both (the game layer then flips a fair coin).  Keeping
ties explicit instead of guessing internally is what lets the exact
enumeration route assign them probability one half.

Attacks never look at unfiltered state.  What they may use is declared in
their AdversaryCapability, and `validate_attack` rejects pair/attack
combinations whose decision rule would need more than the capability
grants.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .core import (DELIVER, FORWARD, SEND, AdversaryCapability,
                   CapabilityError, sender_counts)

COUNTING = "counting"
TIMING = "timing-interval"
TRACING = "path-tracing"
DROP_ATTACK = "dropping"
RANDOM_GUESS = "random-guess"

ATTACKS = (COUNTING, TIMING, TRACING, DROP_ATTACK, RANDOM_GUESS)


@dataclass(frozen=True)
class AttackKind:
    variant: str
    capability: AdversaryCapability

    def __post_init__(self):
        if self.variant not in ATTACKS:
            raise ValueError(f"unknown attack {self.variant!r}")


def counting_attack(n: int) -> AttackKind:
    """Global send counter: excludes scenarios that claim more sends from a
    user than were observed."""
    return AttackKind(COUNTING, AdversaryCapability(
        observed_senders=frozenset(range(n)),
        receiver_corrupted=True, knows_total_real=True))


def timing_attack(n: int) -> AttackKind:
    """Watches all send links plus the challenge receiver and intersects
    arrival times with the possible transit window."""
    return AttackKind(TIMING, AdversaryCapability(
        observed_senders=frozenset(range(n)), receiver_corrupted=True))


def tracing_attack(n: int, c_p: int) -> AttackKind:
    """Timing attack that additionally follows packets through the first
    c_p compromised relays."""
    return AttackKind(TRACING, AdversaryCapability(
        observed_senders=frozenset(range(n)), receiver_corrupted=True,
        c_p=c_p))


def dropping_attack(n: int, c_a: int = 0) -> AttackKind:
    """Active attack that kills the target's packets and watches whether
    the expected message still arrives.  c_a = 0 means full control over
    the target's own link; c_a >= 1 means control over that many relays
    instead."""
    return AttackKind(DROP_ATTACK, AdversaryCapability(
        observed_senders=frozenset(range(n)), receiver_corrupted=True,
        c_a=c_a, active_drop=True, knows_expected_reception=True))


def random_guess_attack() -> AttackKind:
    return AttackKind(RANDOM_GUESS, AdversaryCapability())


def validate_attack(attack: AttackKind, pair, params) -> None:
    """Raise CapabilityError if the attack cannot legally run on this pair."""
    cap = attack.capability
    v = attack.variant
    if v == COUNTING:
        if not (cap.receiver_corrupted or cap.knows_total_real):
            raise CapabilityError("counting needs the receiver side or "
                                  "knowledge of the real send totals")
        if not cap.observed_senders:
            raise CapabilityError("counting needs at least one watched sender")
    elif v in (TIMING, TRACING):
        if not cap.receiver_corrupted:
            raise CapabilityError("timing needs the challenge receiver")
        s0, s1 = pair.suspects()
        if s0 not in cap.observed_senders or s1 not in cap.observed_senders:
            raise CapabilityError("timing needs both suspects' links watched")
    elif v == DROP_ATTACK:
        if not (cap.active_drop and cap.knows_expected_reception
                and cap.receiver_corrupted):
            raise CapabilityError("dropping needs active control, the "
                                  "receiver, and the expected reception")
        pair.suspects()


def _challenge_arrival(trace, pair):
    msg = pair.challenge_message()
    recv = pair.challenge_receiver()
    for e in trace.events:
        if e.kind == DELIVER and e.location == recv and e.msg == msg:
            return e
    return None


def counting_decide(trace, pair, params, cap):
    observed = cap.observed_senders
    seen = {}
    for e in trace.events:
        if e.kind == SEND:
            seen[e.location] = seen.get(e.location, 0) + 1
    alive = []
    for b in (0, 1):
        claims = sender_counts(pair.batch(b))
        # a scenario survives unless some watched user sent too little for it
        if all(seen.get(u, 0) >= c for u, c in claims.items() if u in observed):
            alive.append(b)
    if len(alive) == 1:
        return alive[0]
    return None


def timing_decide(trace, pair, params, cap):
    s0, s1 = pair.suspects()
    arrival = _challenge_arrival(trace, pair)
    if arrival is None:
        return None
    # direct delivery keeps the packet id, which identifies the sender
    for e in trace.events:
        if e.kind == SEND and e.packet == arrival.packet:
            if e.location == s0:
                return 0
            if e.location == s1:
                return 1
    lo = arrival.round - params.l_max + 1
    hi = arrival.round - 1
    in_window = [False, False]
    for e in trace.events:
        if e.kind == SEND and lo <= e.round <= hi:
            if e.location == s0:
                in_window[0] = True
            elif e.location == s1:
                in_window[1] = True
    if in_window[0] != in_window[1]:
        return 0 if in_window[0] else 1
    return None


def tracing_decide(trace, pair, params, cap):
    s0, s1 = pair.suspects()
    arrival = _challenge_arrival(trace, pair)
    if arrival is None:
        return None
    by_packet = {e.packet: e for e in trace.events if e.kind != DELIVER}
    cur = arrival.in_packet
    for _ in range(len(trace.events)):
        if cur is None:
            break
        e = by_packet.get(cur)
        if e is None:
            break  # chain passes an honest relay, lost
        if e.kind == SEND:
            if e.location == s0:
                return 0
            if e.location == s1:
                return 1
            break
        cur = e.in_packet
    return timing_decide(trace, pair, params, cap)


def dropping_decide(trace, pair, params, cap):
    # the target (scenario-1 suspect) was strangled: silence convicts it
    return 0 if _challenge_arrival(trace, pair) is not None else 1


def decide(attack: AttackKind, trace, pair, params):
    v = attack.variant
    if v == COUNTING:
        return counting_decide(trace, pair, params, attack.capability)
    if v == TIMING:
        return timing_decide(trace, pair, params, attack.capability)
    if v == TRACING:
        return tracing_decide(trace, pair, params, attack.capability)
    if v == DROP_ATTACK:
        return dropping_decide(trace, pair, params, attack.capability)
    if v == RANDOM_GUESS:
        return None
    raise ValueError(v)  # pragma: no cover


def dropping_success_rate(c_a: int, copies: int, pool: int):
    """Chance that relay control with c_a relays kills every copy; link
    control (c_a = 0) always succeeds."""
    if c_a == 0:
        return 1.0
    if c_a < copies:
        return 0.0
    return comb(c_a, copies) / comb(pool, copies)


def dropping_actions(events, pair, cap, params):
    """Fixture policy for DroppingSession: after seeing `events`, which
    (packet, location) drops to request next.  Mirrors what build_trace
    applies in one shot."""
    target = pair.suspects()[1]
    link = (cap.active_drop and cap.c_a == 0
            and target in cap.observed_senders)
    actions = []
    target_packets = set()
    for e in events:
        if e.kind == SEND and e.location == target:
            target_packets.add(e.packet)
            if link:
                actions.append((e.packet, e.location))
        if (e.kind == FORWARD and link and params.integrated
                and e.location == target):
            # integrated model: the target is a first hop, its outbound
            # link is cut, so forwards for other senders die with it
            actions.append((e.packet, e.location))
            continue
        if e.kind == FORWARD and e.in_packet in target_packets:
            loc = e.location
            idx = loc if params.integrated else -loc - 1
            if cap.active_drop and 0 <= idx < cap.c_a:
                actions.append((e.packet, loc))
    return actions
