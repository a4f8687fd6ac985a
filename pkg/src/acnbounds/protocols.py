"""Toy protocol models producing adversary-observable traces.

Each model answers one question: given a challenge pair and a secret bit b,
what does the network do, and which part of that can a given adversary see.
The models are deliberately small; they exist so that closed-form bounds
have something concrete to be checked against.

Shared conventions:

* Rounds are integers starting at 1.  Batch rows enter the network at
  t0 = l_max (simultaneous batches all at t0, slotted models one row per
  round from t0 on), which leaves room below t0 for every transit window
  an attack may inspect.
* Transit delay is uniform on {1, ..., l_max-1} rounds.  l_max = 1 means
  direct same-round delivery and the delivered packet keeps its id; any
  longer path re-randomizes ids, so linkage exists only via timing.
* Packet ids are relabeled canonically after construction (first mention
  in sorted event order).  Ids are therefore a function of the visible
  geometry of the trace, never of internal construction order, and cannot
  act as a side channel for the challenge bit.
* Cover traffic is modeled on the sending side only.  Dummy packets are
  absorbed unobserved at the far end; receiver-side dummy handling is out
  of scope here.

Randomness is split three ways so Monte Carlo and exact enumeration share
one code path: `sample_outcome` draws a hashable outcome, `enumerate_outcomes`
yields every (probability, outcome) pair with exact fractions, and
`build_trace` deterministically turns an outcome into events.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .core import (DELIVER, DROP, FORWARD, NO_COMM, RANDOM_PERM, SEND,
                   CapabilityError, ConfigError, ObservationEvent,
                   ObservationTrace, ResourceLimitError, filter_trace,
                   relay_loc)

TRILEMMA_SYNC = "trilemma-sync"
TRILEMMA_UNSYNC = "trilemma-unsync"
ONION_PATH = "onion-path"
THRESHOLD_MIX = "threshold-mix"
DCNET = "dcnet-round"
BROADCAST = "broadcast-full-dummy"
DROPPING = "dropping-model"

VARIANTS = (TRILEMMA_SYNC, TRILEMMA_UNSYNC, ONION_PATH, THRESHOLD_MIX,
            DCNET, BROADCAST, DROPPING)

# slotted models place one batch row per round; the rest send simultaneously
_SLOTTED = (TRILEMMA_SYNC, DCNET)

ENUM_LIMIT = 2_000_000


@dataclass(frozen=True)
class ProtocolKind:
    variant: str
    params: ProtocolParams

    def __post_init__(self):
        v, p = self.variant, self.params
        if v not in VARIANTS:
            raise ConfigError(f"unknown protocol variant {v!r}")
        if v == ONION_PATH:
            if p.relays < 1:
                raise ConfigError("onion routing needs at least one relay")
            if p.relays < p.l_exp - 1:
                raise ConfigError("path needs l_exp-1 distinct relays")
        if v == THRESHOLD_MIX and p.threshold < 1:
            raise ConfigError("threshold mix needs threshold >= 1")
        if v == DROPPING:
            pool = p.n if p.integrated else p.relays
            if pool < p.copies:
                raise ConfigError("need at least `copies` distinct first hops")


def make_protocol(variant: str, params: ProtocolParams) -> ProtocolKind:
    return ProtocolKind(variant, params)


def _num_dummies(params) -> int:
    # synchronized cover: floor(beta*n) users join each communication round
    return min(int(params.beta * params.n), params.n - 1)


def _slots(kind: ProtocolKind, batch, perm):
    t0 = kind.params.l_max
    out = []
    for j, row in enumerate(batch.rows):
        if row is NO_COMM:
            out.append(None)
        elif kind.variant in _SLOTTED or batch.mode == RANDOM_PERM:
            out.append(t0 + (perm[j] if perm is not None else j))
        else:
            out.append(t0)
    return out


def _max_delay(kind: ProtocolKind) -> int:
    v, p = kind.variant, kind.params
    if v in (TRILEMMA_SYNC, TRILEMMA_UNSYNC):
        return p.l_max - 1
    if v == ONION_PATH:
        return p.l_exp - 1
    if v == THRESHOLD_MIX:
        return 1
    if v == BROADCAST:
        return 1
    return 0


def _horizon(kind: ProtocolKind, batch) -> int:
    if kind.variant == DROPPING:
        needed = 3
    else:
        t0 = kind.params.l_max
        span = len(batch.rows) - 1 if (kind.variant in _SLOTTED or
                                       batch.mode == RANDOM_PERM) else 0
        needed = t0 + span + _max_delay(kind)
    if kind.params.rounds is not None:
        if kind.params.rounds < needed:
            raise ConfigError(f"rounds={kind.params.rounds} too short, "
                              f"need at least {needed}")
        return kind.params.rounds
    return needed


def _noise_slots(kind: ProtocolKind, batch, slots, horizon):
    """(round, user) pairs free for cover traffic, in draw order."""
    busy = {}
    for j, row in enumerate(batch.rows):
        if slots[j] is not None:
            busy.setdefault(slots[j], set()).add(row.sender)
    out = []
    for t in range(1, horizon + 1):
        occupied = busy.get(t, ())
        for u in range(kind.params.n):
            if u not in occupied:
                out.append((t, u))
    return out


def _delay_choices(kind: ProtocolKind):
    if kind.params.l_max == 1:
        return (0,)
    return tuple(range(1, kind.params.l_max))


def _needs_perm(kind: ProtocolKind, batch) -> bool:
    return batch.mode == RANDOM_PERM and kind.variant != DROPPING


# ---------------------------------------------------------------- sampling

def sample_outcome(kind: ProtocolKind, pair, b: int, rng: random.Random):
    """Draw one random outcome.  The draw order is fixed: permutation,
    then per-row randomness in row order, then cover traffic in slot order.
    """
    batch = pair.batch(b)
    params = kind.params
    v = kind.variant
    perm = tuple(rng.sample(range(len(batch.rows)), len(batch.rows))) \
        if _needs_perm(kind, batch) else None
    slots = _slots(kind, batch, perm)
    horizon = _horizon(kind, batch)

    if v == TRILEMMA_UNSYNC:
        delays = tuple(None if s is None else rng.choice(_delay_choices(kind))
                       for s in slots)
        p = params.p
        fired = tuple(sl for sl in _noise_slots(kind, batch, slots, horizon)
                      if rng.random() < p)
        return (perm, delays, fired)

    if v == TRILEMMA_SYNC:
        delays = tuple(None if s is None else rng.choice(_delay_choices(kind))
                       for s in slots)
        d = _num_dummies(params)
        cohorts = []
        for j, row in enumerate(batch.rows):
            if slots[j] is None:
                continue
            others = [u for u in range(params.n) if u != row.sender]
            cohorts.append((slots[j], tuple(sorted(rng.sample(others, d)))))
        return (perm, delays, tuple(cohorts))

    if v == ONION_PATH:
        h = params.l_exp - 1
        paths = tuple(None if s is None else tuple(rng.sample(range(params.relays), h))
                      for s in slots)
        p = params.p
        noise = []
        for sl in _noise_slots(kind, batch, slots, horizon):
            if rng.random() < p:
                noise.append((sl, tuple(rng.sample(range(params.relays), h))))
        return (perm, paths, tuple(noise))

    if v == DROPPING:
        pool = range(params.n) if params.integrated else range(params.relays)
        paths = tuple(None if row is NO_COMM
                      else tuple(sorted(rng.sample(pool, params.copies)))
                      for row in batch.rows)
        return (None, paths)

    # threshold mix, dc-net and broadcast are deterministic given the schedule
    return (perm,)


# ------------------------------------------------------------- enumeration

def _guard(count: int):
    if count > ENUM_LIMIT:
        raise ResourceLimitError(f"outcome space has {count} leaves, "
                                 f"limit is {ENUM_LIMIT}")


def _bernoulli_branches(p: Fraction, on, off):
    if p == 1:
        return [(Fraction(1), on)]
    if p == 0:
        return [(Fraction(1), off)]
    return [(1 - p, off), (p, on)]


def enumerate_outcomes(kind: ProtocolKind, pair, b: int):
    """Every (probability, outcome) with exact Fraction probabilities.

    Mirrors `sample_outcome` exactly; zero-probability branches are pruned
    so degenerate parameters (p of 0 or 1) stay cheap.
    """
    batch = pair.batch(b)
    params = kind.params
    v = kind.variant

    perm_choices = list(itertools.permutations(range(len(batch.rows)))) \
        if _needs_perm(kind, batch) else [None]

    results = []
    for perm in perm_choices:
        perm_p = Fraction(1, len(perm_choices))
        slots = _slots(kind, batch, perm)
        horizon = _horizon(kind, batch)

        if v == TRILEMMA_UNSYNC:
            dchoices = _delay_choices(kind)
            free = _noise_slots(kind, batch, slots, horizon)
            p = Fraction(params.p)
            live = len(dchoices) ** sum(1 for s in slots if s is not None)
            if 0 < p < 1:
                live *= 2 ** len(free)
            _guard(live * len(perm_choices))
            row_axes = [[(Fraction(1, len(dchoices)), d) for d in dchoices]
                        if s is not None else [(Fraction(1), None)]
                        for s in slots]
            slot_axes = [_bernoulli_branches(p, sl, None) for sl in free]
            for combo in itertools.product(*row_axes, *slot_axes):
                prob = perm_p
                for q, _ in combo:
                    prob *= q
                delays = tuple(x for _, x in combo[:len(slots)])
                fired = tuple(x for _, x in combo[len(slots):] if x is not None)
                results.append((prob, (perm, delays, fired)))

        elif v == TRILEMMA_SYNC:
            dchoices = _delay_choices(kind)
            d = _num_dummies(params)
            sched = [(slots[j], row) for j, row in enumerate(batch.rows)
                     if slots[j] is not None]
            live = len(dchoices) ** len(sched)
            for _, row in sched:
                live *= comb(params.n - 1, d)
            _guard(live * len(perm_choices))
            row_axes = [[(Fraction(1, len(dchoices)), dd) for dd in dchoices]
                        if s is not None else [(Fraction(1), None)]
                        for s in slots]
            cohort_axes = []
            for t, row in sched:
                others = [u for u in range(params.n) if u != row.sender]
                opts = [(Fraction(1, comb(len(others), d)), (t, c))
                        for c in itertools.combinations(others, d)]
                cohort_axes.append(opts)
            for combo in itertools.product(*row_axes, *cohort_axes):
                prob = perm_p
                for q, _ in combo:
                    prob *= q
                delays = tuple(x for _, x in combo[:len(slots)])
                cohorts = tuple(x for _, x in combo[len(slots):])
                results.append((prob, (perm, delays, cohorts)))

        elif v == ONION_PATH:
            h = params.l_exp - 1
            npaths = 1
            for i in range(h):
                npaths *= params.relays - i
            free = _noise_slots(kind, batch, slots, horizon)
            p = Fraction(params.p)
            live = npaths ** sum(1 for s in slots if s is not None)
            if 0 < p < 1:
                live *= (1 + npaths) ** len(free)
            elif p == 1:
                live *= npaths ** len(free)
            _guard(live * len(perm_choices))
            allpaths = list(itertools.permutations(range(params.relays), h))
            row_axes = [[(Fraction(1, npaths), pt) for pt in allpaths]
                        if s is not None else [(Fraction(1), None)]
                        for s in slots]
            slot_axes = []
            for sl in free:
                on = [(p * Fraction(1, npaths), (sl, pt)) for pt in allpaths]
                if p == 1:
                    slot_axes.append(on)
                elif p == 0:
                    slot_axes.append([(Fraction(1), None)])
                else:
                    slot_axes.append([(1 - p, None)] + on)
            for combo in itertools.product(*row_axes, *slot_axes):
                prob = perm_p
                for q, _ in combo:
                    prob *= q
                paths = tuple(x for _, x in combo[:len(slots)])
                noise = tuple(x for _, x in combo[len(slots):] if x is not None)
                results.append((prob, (perm, paths, noise)))

        elif v == DROPPING:
            pool = range(params.n) if params.integrated else range(params.relays)
            per_row = comb(len(pool), params.copies)
            live = per_row ** sum(1 for row in batch.rows if row is not NO_COMM)
            _guard(live)
            axes = [[(Fraction(1, per_row), c)
                     for c in itertools.combinations(pool, params.copies)]
                    if row is not NO_COMM else [(Fraction(1), None)]
                    for row in batch.rows]
            for combo in itertools.product(*axes):
                prob = Fraction(1)
                for q, _ in combo:
                    prob *= q
                results.append((prob, (None, tuple(x for _, x in combo))))

        else:
            results.append((perm_p, (perm,)))

    return results


# ---------------------------------------------------------------- building

def _canonical(events) -> ObservationTrace:
    # relabel packet ids by first mention in sorted order
    trace = ObservationTrace.from_events(events)
    ids = {}

    def re(p):
        if p is None:
            return None
        if p not in ids:
            ids[p] = len(ids)
        return ids[p]

    return ObservationTrace(tuple(
        e._replace(packet=re(e.packet), in_packet=re(e.in_packet))
        for e in trace.events))


def build_trace(kind: ProtocolKind, pair, b: int, outcome,
                capability=None) -> ObservationTrace:
    """Deterministically expand an outcome into the full (unfiltered) trace.

    `capability` only matters for the dropping model, where an active
    adversary physically removes packets; everywhere else observation is
    passive and filtering happens afterwards.
    """
    batch = pair.batch(b)
    params = kind.params
    v = kind.variant
    perm = outcome[0]
    slots = _slots(kind, batch, perm)
    horizon = _horizon(kind, batch)
    pid = itertools.count()
    ev = []

    def send(t, u, q, real, msg=None):
        ev.append(ObservationEvent(SEND, t, u, q, is_real=real, msg=msg))

    def deliver(t, u, q, msg, in_packet=None):
        ev.append(ObservationEvent(DELIVER, t, u, q, is_real=True,
                                   in_packet=in_packet, msg=msg))

    if v in (TRILEMMA_UNSYNC, TRILEMMA_SYNC):
        delays = outcome[1]
        for j, row in enumerate(batch.rows):
            if slots[j] is None:
                continue
            t, d = slots[j], delays[j]
            q = next(pid)
            send(t, row.sender, q, True, row.message)
            if d == 0:
                # direct delivery keeps the id: nothing re-randomized it
                deliver(t, row.receiver, q, row.message, in_packet=q)
            else:
                deliver(t + d, row.receiver, next(pid), row.message)
        if v == TRILEMMA_UNSYNC:
            for (t, u) in outcome[2]:
                send(t, u, next(pid), False)
        else:
            for (t, cohort) in outcome[2]:
                for u in cohort:
                    send(t, u, next(pid), False)

    elif v == ONION_PATH:
        paths = outcome[1]

        def emit(t, u, path, row):
            q = next(pid)
            send(t, u, q, row is not None, row.message if row else None)
            prev, ploc = q, u
            for i, k in enumerate(path, start=1):
                nq = next(pid)
                ev.append(ObservationEvent(FORWARD, t + i, relay_loc(k), nq,
                                           origin=ploc, in_packet=prev))
                prev, ploc = nq, relay_loc(k)
            if row is not None:
                if path:
                    deliver(t + len(path), row.receiver, next(pid),
                            row.message, in_packet=prev)
                else:
                    deliver(t, row.receiver, q, row.message, in_packet=q)

        for j, row in enumerate(batch.rows):
            if slots[j] is not None:
                emit(slots[j], row.sender, paths[j], row)
        for (t, u), path in outcome[2]:
            emit(t, u, path, None)

    elif v == THRESHOLD_MIX:
        order = sorted((s, j) for j, s in enumerate(slots) if s is not None)
        if len(order) < params.threshold:
            raise ConfigError("fewer scheduled messages than the threshold, "
                              "the mix would never flush")
        held = []
        for t, j in order:
            row = batch.rows[j]
            send(t, row.sender, next(pid), True, row.message)
            held.append((t, row))
            if len(held) == params.threshold:
                flush = t + 1
                for _, r in held:
                    deliver(flush, r.receiver, next(pid), r.message)
                held = []

    elif v == DCNET:
        real_at = {slots[j]: batch.rows[j] for j in range(len(slots))
                   if slots[j] is not None}
        for t in range(1, horizon + 1):
            row = real_at.get(t)
            for u in range(params.n):
                send(t, u, next(pid), row is not None and u == row.sender)
            if row is not None:
                deliver(t, row.receiver, next(pid), row.message)

    elif v == BROADCAST:
        real_slots = {}
        for j, s in enumerate(slots):
            if s is not None:
                real_slots.setdefault(s, []).append(batch.rows[j])
        for t in range(1, horizon + 1):
            senders_now = {r.sender for r in real_slots.get(t, ())}
            for u in range(params.n):
                send(t, u, next(pid), u in senders_now)
            for r in real_slots.get(t, ()):
                deliver(t + 1, r.receiver, next(pid), r.message)

    elif v == DROPPING:
        paths = outcome[1]
        target = pair.suspects()[1]
        cap = capability
        link_drop = bool(cap and cap.active_drop and cap.c_a == 0
                         and target in cap.observed_senders)
        controlled = set(range(cap.c_a)) if cap and cap.active_drop else set()
        for j, row in enumerate(batch.rows):
            if row is NO_COMM:
                continue
            survivors = []
            for k in paths[j]:
                q = next(pid)
                send(1, row.sender, q, True, row.message)
                if row.sender == target and link_drop:
                    ev.append(ObservationEvent(DROP, 1, row.sender, q))
                    continue
                loc = k if params.integrated else relay_loc(k)
                if link_drop and params.integrated and loc == target:
                    # the cut link also swallows copies the target forwards
                    # for others, so silence can wrongly accuse it
                    ev.append(ObservationEvent(DROP, 2, loc, q))
                    continue
                if row.sender == target and k in controlled:
                    ev.append(ObservationEvent(DROP, 2, loc, q))
                    continue
                nq = next(pid)
                ev.append(ObservationEvent(FORWARD, 2, loc, nq,
                                           origin=row.sender, in_packet=q))
                survivors.append(nq)
            if survivors:
                deliver(3, row.receiver, next(pid), row.message,
                        in_packet=survivors[0])

    else:  # pragma: no cover
        raise AssertionError(v)

    return _canonical(ev)


def run_protocol(kind: ProtocolKind, pair, b: int, capability,
                 seed: int) -> ObservationTrace:
    """One full protocol run as the given adversary sees it."""
    rng = random.Random(seed)
    outcome = sample_outcome(kind, pair, b, rng)
    trace = build_trace(kind, pair, b, outcome, capability)
    return filter_trace(trace, capability)


# ------------------------------------------------------- interactive drops

class DroppingSession:
    """Round-by-round interface to the dropping model.

    The batch is sent in round 1, first hops forward in round 2, delivery
    happens in round 3.  Between rounds the adversary may drop packets at
    locations it controls; anything else raises CapabilityError.  The
    fixed policy in `adversaries.dropping_actions` reproduces exactly what
    `build_trace` does in one shot, and a test holds the two together.
    """

    def __init__(self, kind: ProtocolKind, pair, b: int, outcome, capability):
        if kind.variant != DROPPING:
            raise ConfigError("interactive stepping only models dropping")
        self.kind = kind
        self.capability = capability
        self.round = 0
        self._dead = set()
        batch = pair.batch(b)
        params = kind.params
        paths = outcome[1]
        pid = itertools.count()
        self._sends = []    # (event, first_hop, row)
        for j, row in enumerate(batch.rows):
            if row is NO_COMM:
                continue
            for k in paths[j]:
                e = ObservationEvent(SEND, 1, row.sender, next(pid),
                                     is_real=True, msg=row.message)
                self._sends.append((e, k, row))
        self._forwards = []  # (event, send_packet, row)
        self._pid = pid

    def _controls(self, location) -> bool:
        cap = self.capability
        if not cap.active_drop:
            return False
        if location < 0:
            return -location - 1 < cap.c_a
        if self.kind.params.integrated and location < cap.c_a:
            return True
        return location in cap.observed_senders

    def step(self, actions=()):
        """Advance one round; `actions` is an iterable of (packet, location)
        drops to apply before the round plays out.  Returns the new events,
        filtered to what the adversary sees."""
        for packet, location in actions:
            if not self._controls(location):
                raise CapabilityError(f"no control over location {location}")
            self._dead.add(packet)
        self.round += 1
        params = self.kind.params
        new = []
        if self.round == 1:
            new = [e for (e, _, _) in self._sends]
        elif self.round == 2:
            for e, k, row in self._sends:
                if e.packet in self._dead:
                    new.append(ObservationEvent(DROP, 1, e.location, e.packet))
                    continue
                loc = k if params.integrated else relay_loc(k)
                f = ObservationEvent(FORWARD, 2, loc, next(self._pid),
                                     origin=e.location, in_packet=e.packet)
                self._forwards.append((f, e.packet, row))
                new.append(f)
        elif self.round == 3:
            by_row = {}
            for f, sp, row in self._forwards:
                if f.packet in self._dead:
                    new.append(ObservationEvent(DROP, 2, f.location, f.packet))
                    continue
                by_row.setdefault(id(row), (row, []))[1].append(f.packet)
            for row, alive in by_row.values():
                new.append(ObservationEvent(DELIVER, 3, row.receiver,
                                            next(self._pid), is_real=True,
                                            in_packet=alive[0], msg=row.message))
        else:
            raise ConfigError("session is over")
        return filter_trace(ObservationTrace.from_events(new),
                            self.capability).events
