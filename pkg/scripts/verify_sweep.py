#!/usr/bin/env python3
"""Run the built-in verification suite over a parameter sweep.

Each line of output is one verify run: the protocol/attack pair, the
parameter point, the simulated advantage with its interval, the reference
value, and pass/fail.  Exits nonzero if any point fails, so the sweep can
gate a CI job.
"""

import argparse
import itertools
import sys

from acnbounds.adversaries import (counting_attack, dropping_attack,
                                   dropping_success_rate, timing_attack)
from acnbounds.bounds import SYNC, UNSYNC_IMPROVED, trilemma_advantage
from acnbounds.core import Communication, ProtocolParams, make_batch
from acnbounds.game import estimate_advantage
from acnbounds.notions import ScenarioPair, parse_notion
from acnbounds.protocols import ProtocolKind

SO = parse_notion("SO")


def _pair(n):
    return ScenarioPair(make_batch([Communication(0, n - 1, 0)]),
                        make_batch([Communication(1, n - 1, 0)]), SO)


def sweep(trials, seed, tol):
    failures = 0

    def check(label, est, expected, floor):
        nonlocal failures
        ok = (est.ci_high + tol >= expected) if floor else \
            (est.ci_low - tol <= expected <= est.ci_high + tol)
        failures += 0 if ok else 1
        print(f"{label:58} adv={est.point:+.4f} "
              f"ci=[{est.ci_low:+.4f},{est.ci_high:+.4f}] "
              f"ref={expected:.4f} {'ok' if ok else 'FAIL'}")

    for n, l_max, p in itertools.product((2, 10), (2, 3), (0.1, 0.5)):
        params = ProtocolParams(n=n, l_max=l_max, beta=p)
        kind = ProtocolKind("trilemma-unsync", params)
        est = estimate_advantage(kind, timing_attack(n), _pair(n), trials, seed)
        ref = trilemma_advantage(UNSYNC_IMPROVED, l_max, p=p)
        check(f"trilemma-unsync timing n={n} l_max={l_max} p={p}",
              est, ref, floor=True)

    for n, beta in ((10, 0.2), (10, 0.9), (20, 0.5)):
        params = ProtocolParams(n=n, l_max=2, beta=beta)
        kind = ProtocolKind("trilemma-sync", params)
        est = estimate_advantage(kind, timing_attack(n), _pair(n), trials, seed)
        ref = trilemma_advantage(SYNC, 2, beta=beta, n=n)
        check(f"trilemma-sync timing n={n} beta={beta}", est, ref, floor=True)

    params = ProtocolParams(n=3, l_max=2)
    kind = ProtocolKind("broadcast-full-dummy", params)
    est = estimate_advantage(kind, counting_attack(3), _pair(3), trials, seed)
    check("broadcast counting n=3", est, 0.0, floor=False)

    for c_a in (0, 1, 2, 4):
        params = ProtocolParams(n=3, l_max=1, relays=4, copies=2)
        kind = ProtocolKind("dropping-model", params)
        est = estimate_advantage(kind, dropping_attack(3, c_a=c_a), _pair(3),
                                 trials, seed)
        ref = dropping_success_rate(c_a, 2, 4)
        check(f"dropping-model c_a={c_a} copies=2 pool=4", est, ref,
              floor=False)

    return failures


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=0.02)
    args = ap.parse_args()
    failures = sweep(args.trials, args.seed, args.tol)
    if failures:
        print(f"{failures} check(s) failed", file=sys.stderr)
        return 2
    print("all checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
