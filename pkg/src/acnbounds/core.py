"""Shared vocabulary for the anonymity-bounds toolkit.

Users are the integers 0..n-1, relays have their own id space (see
``relay_loc``), rounds are 1-based integers.  A protocol run is summarized
as a round-ordered trace of observation events; what an adversary gets to
see is produced by filtering the full trace against her capability.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union


class ConfigError(ValueError):
    """Protocol parameters inconsistent with the requested run."""


class CapabilityError(ValueError):
    """An attack or action needs a vantage point the capability does not grant."""


class ResourceLimitError(ValueError):
    """Exact enumeration was asked for a randomness space too large to walk."""


class _NoComm:
    # distinguished "no communication" slot; batches may mix it with real rows
    __slots__ = ()

    def __repr__(self):
        return "NO_COMM"


NO_COMM = _NoComm()

SIMULTANEOUS = "simultaneous"
RANDOM_PERM = "random-permutation"
_MODES = (SIMULTANEOUS, RANDOM_PERM)


@dataclass(frozen=True)
class Communication:
    """One sender-to-receiver message; payload and aux tag are opaque ids."""

    sender: int
    receiver: int
    message: int
    aux: object = None


Row = Union[Communication, _NoComm]


@dataclass(frozen=True)
class Batch:
    """Ordered rows handed to the challenger; start order depends on mode."""

    rows: tuple
    mode: str = SIMULTANEOUS


def make_batch(comms, mode=SIMULTANEOUS) -> Batch:
    """Build a batch from a sequence of Communication/NO_COMM rows."""
    rows = tuple(comms)
    if not rows:
        raise ValueError("batch needs at least one row")
    if mode not in _MODES:
        raise ValueError(f"unknown ordering mode {mode!r}")
    for r in rows:
        if not isinstance(r, (Communication, _NoComm)):
            raise ValueError(f"not a batch row: {r!r}")
    return Batch(rows, mode)


def sender_counts(batch: Batch) -> dict:
    counts = {}
    for r in batch.rows:
        if isinstance(r, Communication):
            counts[r.sender] = counts.get(r.sender, 0) + 1
    return counts


def receiver_counts(batch: Batch) -> dict:
    counts = {}
    for r in batch.rows:
        if isinstance(r, Communication):
            counts[r.receiver] = counts.get(r.receiver, 0) + 1
    return counts


@dataclass(frozen=True)
class ProtocolParams:
    """Knobs shared by all protocol models.

    n        user count
    l_max    maximum delivery delay in rounds (send round included at 1)
    beta     per-round dummy-send probability per user
    p_real   per-round real-send probability per user; p = p_real + beta
    l_exp    expected delay in rounds, defaults to l_max
    relays   intermediate-relay pool size (K)
    threshold  messages per mix flush (threshold mix only)
    copies   redundant first hops (dropping model only)
    rounds   observation horizon, defaults to what the run needs
    integrated  dropping model: first hops are users, not dedicated relays
    """

    n: int
    l_max: int
    beta: float = 0.0
    p_real: float = 0.0
    l_exp: Optional[int] = None
    relays: int = 0
    threshold: int = 0
    copies: int = 1
    rounds: Optional[int] = None
    integrated: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2 users")
        if self.l_max < 1:
            raise ValueError("need l_max >= 1")
        if not (0.0 <= self.beta <= 1.0 and 0.0 <= self.p_real <= 1.0):
            raise ValueError("beta and p_real must lie in [0, 1]")
        if self.beta + self.p_real > 1.0:
            raise ValueError("p = p_real + beta may not exceed 1")
        if self.l_exp is None:
            object.__setattr__(self, "l_exp", self.l_max)
        if not (1 <= self.l_exp <= self.l_max):
            raise ValueError("need 1 <= l_exp <= l_max")
        if self.relays < 0 or self.threshold < 0:
            raise ValueError("relays and threshold must be non-negative")
        if self.copies < 1:
            raise ValueError("need copies >= 1")
        if self.rounds is not None and self.rounds < 1:
            raise ValueError("need rounds >= 1")

    @property
    def p(self) -> float:
        return self.beta + self.p_real


@dataclass(frozen=True)
class AdversaryCapability:
    """What the adversary can see and do during a run."""

    observed_senders: frozenset = frozenset()
    receiver_corrupted: bool = False
    c_p: int = 0
    c_a: int = 0
    active_drop: bool = False
    knows_expected_reception: bool = False
    knows_total_real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "observed_senders", frozenset(self.observed_senders))
        if self.c_p < 0 or self.c_a < 0:
            raise ValueError("corruption counts must be non-negative")
        if self.active_drop and self.c_a < 1 and not self.observed_senders:
            raise ValueError("active dropping needs a controlled relay or sender link")


# relay k is stored in event locations as -(k + 1); user ids are >= 0
def relay_loc(k: int) -> int:
    return -(k + 1)


def is_relay_loc(loc) -> bool:
    return isinstance(loc, int) and loc < 0


SEND = "send"
FORWARD = "forward"
DELIVER = "deliver"
DROP = "drop"
_KIND_ORDER = {SEND: 0, FORWARD: 1, DROP: 2, DELIVER: 3}


class ObservationEvent(NamedTuple):
    """One observable fact.

    kind       send | forward | deliver | drop
    round      1-based round the event happened in
    location   user id (send/deliver) or relay location (forward/drop)
    packet     wire-level packet id; relays re-randomize it per hop
    is_real    real-vs-dummy flag, populated only where the capability allows
    origin     previous hop (sender link or relay) where the vantage sees it
    in_packet  incoming packet id at a relay, links the hop for its observer
    msg        payload id, visible only at a corrupted receiver
    """

    kind: str
    round: int
    location: int
    packet: int
    is_real: Optional[bool] = None
    origin: Optional[int] = None
    in_packet: Optional[int] = None
    msg: Optional[int] = None


@dataclass(frozen=True)
class ObservationTrace:
    events: tuple

    @staticmethod
    def from_events(events) -> "ObservationTrace":
        ordered = sorted(events, key=lambda e: (e.round, _KIND_ORDER[e.kind], e.location, e.packet))
        return ObservationTrace(tuple(ordered))


def filter_trace(trace: ObservationTrace, capability: AdversaryCapability) -> ObservationTrace:
    """Reduce a full trace to exactly what the capability permits.

    Conventions: the first c_p relay ids are passively compromised and the
    first c_a are actively controlled (protocols pick relays uniformly, so
    fixing the identities loses no generality).  A corrupted receiver opens
    deliver events, including the real/dummy flag and payload id; everywhere
    else those two fields are masked.  Total and deterministic, hence
    idempotent.
    """
    seen = capability.c_p if capability.c_p >= capability.c_a else capability.c_a
    out = []
    for ev in trace.events:
        if ev.kind == SEND:
            if ev.location in capability.observed_senders:
                if ev.is_real is None and ev.msg is None:
                    out.append(ev)
                else:
                    out.append(ev._replace(is_real=None, msg=None))
        elif ev.kind == FORWARD:
            if is_relay_loc(ev.location):
                visible = -ev.location - 1 < seen
            else:
                # user-node forwards exist only in the integrated dropping
                # model; cutting a link needs active control of it
                visible = capability.active_drop and (
                    ev.location < capability.c_a
                    or ev.location in capability.observed_senders)
            if visible:
                if ev.is_real is None and ev.msg is None:
                    out.append(ev)
                else:
                    out.append(ev._replace(is_real=None, msg=None))
        elif ev.kind == DELIVER:
            if capability.receiver_corrupted:
                out.append(ev)
        elif ev.kind == DROP:
            # drops are the adversary's own doing
            if capability.active_drop:
                out.append(ev)
    return ObservationTrace(tuple(out))


@dataclass(frozen=True)
class TrafficStats:
    """Per-sender send volumes plus delivered/sent totals for one trace."""

    L: dict = field(default_factory=dict)
    out: int = 0
    com: int = 0


def traffic_stats(trace: ObservationTrace, params: Optional[ProtocolParams] = None,
                  upto_round: Optional[int] = None) -> TrafficStats:
    """Count L_i (sends per user), Out (real deliveries) and Com (all sends).

    Com counts user-originated send events only, not relay forwards, so
    Com == sum(L_i) holds by construction.
    """
    horizon = upto_round
    if horizon is None and params is not None and params.rounds is not None:
        horizon = params.rounds
    L: dict = {}
    out = 0
    for ev in trace.events:
        if horizon is not None and ev.round > horizon:
            continue
        if ev.kind == SEND:
            L[ev.location] = L.get(ev.location, 0) + 1
        elif ev.kind == DELIVER and ev.is_real:
            out += 1
    return TrafficStats(L=L, out=out, com=sum(L.values()))
