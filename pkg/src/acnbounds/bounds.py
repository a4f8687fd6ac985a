"""Closed-form lower bounds on adversary advantage and protocol overhead.

Conventions used throughout:

  n       number of users
  l_max   worst-case latency in rounds a message may stay in transit
  beta    dummy rate: expected dummy messages per user per round
  p       total send rate per user per round (real plus dummy traffic)
  c_p     passively compromised relays, K relays overall

Synchronized-cover bounds take beta; unsynchronized ones take p.  Every
function returns the advantage any protocol in the model class must
concede to some adversary, i.e. larger is worse for the protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

SYNC = "sync"
UNSYNC_ORIGINAL = "unsync-original"
UNSYNC_IMPROVED = "unsync-improved"
SETTINGS = (SYNC, UNSYNC_ORIGINAL, UNSYNC_IMPROVED)


def _clamp(x: float) -> float:
    return 0.0 if x < 0.0 else (1.0 if x > 1.0 else x)


def _check_rate(name, x):
    if x is None or not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def covered_fraction(x: float, n: int, beta: float) -> float:
    """Chance bound that a bystander shows up among x rounds of cover
    traffic: min(1, x*(1 + beta*n)/(n - 1))."""
    if n < 2:
        raise ValueError("need n >= 2")
    return min(1.0, x * (1.0 + beta * n) / (n - 1))


def trilemma_advantage(setting: str, l_max: int, beta=None, p=None, n=None):
    """Minimum advantage forced by latency l_max and the given send rates."""
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    if setting == SYNC:
        _check_rate("beta", beta)
        if n is None or n < 2:
            raise ValueError("sync setting needs n >= 2")
        return _clamp(1.0 - covered_fraction(l_max - 1, n, beta))
    if setting == UNSYNC_ORIGINAL:
        _check_rate("p", p)
        # the adversary may have to split its bet with a half guess
        return _clamp((1.0 - p) ** (l_max - 1) - 0.5)
    if setting == UNSYNC_IMPROVED:
        _check_rate("p", p)
        return _clamp((1.0 - p) ** (l_max - 1))
    raise ValueError(f"unknown setting {setting!r}")


def trilemma_compromising(setting: str, l_max: int, beta=None, p=None,
                          n=None, c_p: int = 0, relays: int = 1):
    """Advantage bound when c_p of the relays leak their mappings.

    Two regimes: with c_p >= l_max - 1 the whole path can land inside the
    compromised set; below that the adversary only shortens the effective
    transit window.
    """
    if l_max < 1:
        raise ValueError("l_max must be at least 1")
    if not 0 <= c_p <= relays:
        raise ValueError("need 0 <= c_p <= relays")
    if setting == SYNC:
        _check_rate("beta", beta)
        if n is None or n < 2:
            raise ValueError("sync setting needs n >= 2")
        if c_p >= l_max - 1:
            hit = comb(c_p, l_max - 1) / comb(relays, l_max - 1)
            return _clamp(1.0 - (1.0 - hit) * covered_fraction(l_max - 1, n, beta))
        miss = 1.0 - 1.0 / comb(relays, c_p)
        return _clamp(1.0 - miss * covered_fraction(c_p, n, beta)
                      - covered_fraction(l_max - 1 - c_p, n, beta))
    if setting == UNSYNC_IMPROVED:
        _check_rate("p", p)
        if c_p >= l_max - 1:
            hit = comb(c_p, l_max - 1) / comb(relays, l_max - 1)
            return _clamp(1.0 - (1.0 - hit) * (1.0 - (1.0 - p) ** (l_max - 1)))
        miss = 1.0 - 1.0 / comb(relays, c_p)
        return _clamp((1.0 - p) ** (l_max - 1 - c_p)
                      * (1.0 - (1.0 - (1.0 - p) ** c_p) * miss))
    raise ValueError(f"no compromising form for setting {setting!r}")


# ------------------------------------------------------------ traffic side

@dataclass(frozen=True)
class CountingBound:
    min_messages: int          # total messages the network must move
    overhead_fraction: float   # share of that total that is overhead
    excluded: tuple = ()       # users whose observed sends fall short


def counting_bound(out_r: int, hops: int, send_counts=None) -> CountingBound:
    """Moving out_r delivered messages over `hops` stages costs at least
    out_r * hops transmissions; all but one stage per message is overhead."""
    if out_r < 0 or hops < 1:
        raise ValueError("need out_r >= 0 and hops >= 1")
    excluded = ()
    if send_counts is not None:
        excluded = tuple(sorted(u for u, c in send_counts.items() if c < out_r))
    return CountingBound(
        min_messages=out_r * hops,
        overhead_fraction=(hops - 1) / hops,
        excluded=excluded)


def optimality_overhead(n: int, mu: int) -> int:
    """Total messages when each of n users pushes mu messages through: the
    matching achievable figure for the counting bound."""
    if n < 0 or mu < 0:
        raise ValueError("need n >= 0 and mu >= 0")
    return n * mu


def traffic_relation(beta: float, n: int, rounds: int, out_r: int) -> float:
    """Total observed volume split into cover and useful traffic."""
    return beta * n * rounds + out_r


# --------------------------------------------------------- parameter space

@dataclass(frozen=True)
class RegionVerdict:
    verdict: str               # impossible | possible | not-applicable
    threshold: float
    condition: str

    def impossible(self) -> bool:
        return self.verdict == "impossible"


def counting_min_beta(poly_lambda: float, out_rate: float = 1.0) -> float:
    """Dummy rate below which the counting adversary wins except with
    polynomially small slack."""
    if poly_lambda <= 1:
        raise ValueError("poly_lambda must exceed 1")
    return out_rate * (1.0 - 1.0 / poly_lambda)


def trilemma_min_beta(l_max: int, poly_lambda: float, c_p: int = 0) -> float:
    """Send rate below which the latency bound keeps the advantage
    non-negligible."""
    if poly_lambda <= 1:
        raise ValueError("poly_lambda must exceed 1")
    if l_max <= 1:
        return math.inf
    window = l_max - 1 - c_p if c_p < l_max - 1 else l_max - 1
    return (1.0 - 1.0 / poly_lambda) / (2.0 * window)


def dropping_min_p(l_max: int, lam: float, poly_lambda: float,
                   base: float = 2.0) -> float:
    """Cover rate below which an actively dropping adversary can starve a
    target without detection."""
    if l_max < 1 or lam <= 1 or poly_lambda <= 1:
        raise ValueError("need l_max >= 1, lam > 1, poly_lambda > 1")
    return math.log(lam, base) / (poly_lambda * l_max)


def impossibility_region(bound: str, n: int, l_max: int, beta=None, p=None,
                         poly_lambda=None, lam=None, c_p: int = 0,
                         out_rate: float = 1.0) -> RegionVerdict:
    """Classify one parameter point: can strong privacy survive there."""
    if poly_lambda is None:
        poly_lambda = float(n)
    slack = 1.0 - 1.0 / poly_lambda

    if bound == "counting":
        rate = beta if beta is not None else p
        thr = counting_min_beta(poly_lambda, out_rate)
        if rate is None:
            raise ValueError("counting region needs beta or p")
        if rate < thr or (p is not None and p < 1.0):
            return RegionVerdict("impossible", thr,
                                 "cover volume cannot hide who communicates")
        return RegionVerdict("possible", thr, "cover matches useful volume")

    if bound == "trilemma":
        rate = beta if beta is not None else p
        if rate is None:
            raise ValueError("trilemma region needs beta or p")
        thr = trilemma_min_beta(l_max, poly_lambda, c_p)
        if l_max <= 1:
            return RegionVerdict("not-applicable", thr,
                                 "no transit window at l_max <= 1")
        window = l_max - 1 - c_p if c_p < l_max - 1 else l_max - 1
        cond = "short window" if c_p < l_max - 1 else \
            "path can hide only inside the compromised set"
        if 2.0 * window * rate <= slack and rate * n >= 1.0:
            return RegionVerdict("impossible", thr, cond)
        if rate * n < 1.0:
            return RegionVerdict("impossible", thr,
                                 "well under one message of cover per round")
        return RegionVerdict("possible", thr, cond)

    if bound == "dropping":
        if p is None:
            raise ValueError("dropping region needs p")
        if lam is None:
            raise ValueError("dropping region needs lam")
        if l_max < 1:
            return RegionVerdict("not-applicable", math.inf, "no rounds")
        thr = dropping_min_p(l_max, lam, poly_lambda)
        if p <= thr:
            return RegionVerdict("impossible", thr,
                                 "too little cover to survive targeted drops")
        return RegionVerdict("possible", thr,
                             "cover outlasts the drop budget")

    raise ValueError(f"unknown bound {bound!r}")


def onion_cost(bound: str, n: int, lam: float, p: float = 1.0,
               l_exp: float = None) -> dict:
    """Messages required under each bound when circuits are l_exp hops."""
    if l_exp is None:
        l_exp = math.log2(lam)
    if bound == "trilemma":
        per_user = n * p * l_exp
    elif bound == "counting":
        per_user = n * l_exp
    elif bound == "dropping":
        per_user = math.log2(lam)
    else:
        raise ValueError(f"unknown bound {bound!r}")
    return {"per-user": per_user, "network": n * per_user}
