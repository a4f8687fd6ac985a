"""Distinguishing game: measure an attack's advantage against a protocol.

Two routes to the same number:

* `estimate_advantage` plays the game trials times with a secret bit,
  counts how often the adversary says 1 under each scenario, and reports
  adv = Pr[guess 1 | b=1] - Pr[guess 1 | b=0] with a Wilson score interval
  per arm.
* `exact_advantage` enumerates every protocol outcome with exact
  probabilities and returns the advantage as a Fraction, counting ties as
  one half.

Determinism contract: all per-trial randomness is derived from
sha256(master_seed:trial_index), so results are byte-identical no matter
how trials are batched across workers.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

from .adversaries import decide, validate_attack
from .core import filter_trace
from .protocols import build_trace, enumerate_outcomes, sample_outcome

WORKERS_ENV = "ACNBOUNDS_WORKERS"
_CHUNK = 2048
# two-sided 95%
_Z = 1.959963984540054


def wilson_interval(k: int, n: int):
    if n == 0:
        return 0.0, 1.0
    z2 = _Z * _Z
    phat = k / n
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = _Z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    # rounding can push the bound a hair past phat at the extremes
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class AdvantageEstimate:
    point: float
    ci_low: float
    ci_high: float
    trials: int
    arms: tuple      # ((n0, guessed1_0), (n1, guessed1_1))
    definition: str = "counting-form"


def resolve_workers(workers=None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _trial_seed(master_seed: int, i: int) -> bytes:
    return hashlib.sha256(f"{master_seed}:{i}".encode()).digest()


def _run_chunk(kind, attack, pair, master_seed, start, stop):
    cap = attack.capability
    params = kind.params
    n0 = k0 = n1 = k1 = 0
    for i in range(start, stop):
        h = _trial_seed(master_seed, i)
        b = h[0] & 1
        rng = random.Random(int.from_bytes(h[1:9], "big"))
        outcome = sample_outcome(kind, pair, b, rng)
        trace = filter_trace(build_trace(kind, pair, b, outcome, cap), cap)
        verdict = decide(attack, trace, pair, params)
        if verdict is None:
            verdict = h[9] & 1
        if b:
            n1 += 1
            k1 += verdict
        else:
            n0 += 1
            k0 += verdict
    return n0, k0, n1, k1


def estimate_advantage(kind, attack, pair, trials: int, master_seed: int,
                       workers=None) -> AdvantageEstimate:
    if trials < 100:
        raise ValueError("need at least 100 trials for a meaningful interval")
    validate_attack(attack, pair, kind.params)
    nworkers = resolve_workers(workers)
    spans = [(s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    if nworkers == 1:
        parts = [_run_chunk(kind, attack, pair, master_seed, a, b)
                 for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            futs = [pool.submit(_run_chunk, kind, attack, pair, master_seed,
                                a, b) for a, b in spans]
            parts = [f.result() for f in futs]
    n0 = sum(p[0] for p in parts)
    k0 = sum(p[1] for p in parts)
    n1 = sum(p[2] for p in parts)
    k1 = sum(p[3] for p in parts)
    if n0 == 0 or n1 == 0:
        raise ValueError("degenerate challenge-bit split, use more trials")
    lo0, hi0 = wilson_interval(k0, n0)
    lo1, hi1 = wilson_interval(k1, n1)
    point = k1 / n1 - k0 / n0
    return AdvantageEstimate(
        point=point,
        ci_low=max(-1.0, lo1 - hi0),
        ci_high=min(1.0, hi1 - lo0),
        trials=trials,
        arms=((n0, k0), (n1, k1)))


def exact_advantage(kind, attack, pair) -> Fraction:
    """Advantage of the attack under full enumeration, as an exact Fraction.

    Ties contribute a fair coin, so the result is 2*Pr[correct] - 1 for the
    canonical tie-breaking adversary.
    """
    validate_attack(attack, pair, kind.params)
    cap = attack.capability
    correct = Fraction(0)
    for b in (0, 1):
        for prob, outcome in enumerate_outcomes(kind, pair, b):
            if prob == 0:
                continue
            trace = filter_trace(build_trace(kind, pair, b, outcome, cap), cap)
            verdict = decide(attack, trace, pair, kind.params)
            if verdict is None:
                share = Fraction(1, 2)
            else:
                share = Fraction(int(verdict == b))
            correct += Fraction(1, 2) * prob * share
    return 2 * correct - 1


def advantage_forms(p_guess1_given1: float, p_guess1_given0: float):
    """The two equivalent ways to report an advantage.

    counting form: difference of the per-scenario guess rates.
    optimality form: 2*Pr[correct] - 1 with a uniform challenge bit.
    """
    for x in (p_guess1_given1, p_guess1_given0):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"probabilities must lie in [0, 1], got {x}")
    counting = p_guess1_given1 - p_guess1_given0
    p_correct = 0.5 * p_guess1_given1 + 0.5 * (1.0 - p_guess1_given0)
    return {"counting-form": counting, "optimality-form": 2.0 * p_correct - 1.0}


def result_record(kind, attack, pair, estimate: AdvantageEstimate,
                  master_seed: int) -> dict:
    params = {k: v for k, v in asdict(kind.params).items() if v is not None}
    return {
        "protocol": kind.variant,
        "attack": attack.variant,
        "notion": pair.notion.name(),
        "params": params,
        "trials": estimate.trials,
        "seed": master_seed,
        "point": estimate.point,
        "ci": [estimate.ci_low, estimate.ci_high],
        "definition": estimate.definition,
    }


def record_json(record: dict) -> str:
    return json.dumps(record, sort_keys=True)
