"""Command line front end.

Subcommands:

  bound      evaluate a closed-form bound at a parameter point
  simulate   run the distinguishing game and report the advantage
  verify     simulate, then check the estimate against the formula
  region     classify a parameter point as possible / impossible
  atlas      preset verdict table, or a CSV grid over (l_max, beta)

Exit codes: 0 on success, 2 when a verification check fails, 1 for usage
or configuration errors.

A JSON file given via --config supplies flat key/value defaults (keys are
the option names with underscores); explicit flags always win.
"""

from __future__ import annotations

import argparse
import json
import sys
from types import SimpleNamespace

from . import atlas as atlas_mod
from . import bounds
from .adversaries import (counting_attack, dropping_attack,
                          dropping_success_rate, random_guess_attack,
                          timing_attack, tracing_attack)
from .core import CapabilityError, ConfigError, ProtocolParams
from .game import estimate_advantage, record_json, result_record
from .notions import generate_pair, parse_notion
from .protocols import ProtocolKind, VARIANTS


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for failed
    # verification, so usage problems leave with 1 instead
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


_BOUND_KINDS = ("trilemma-sync", "trilemma-unsync-original",
                "trilemma-unsync-improved", "compromising-sync",
                "compromising-unsync", "counting", "optimality",
                "onion-cost")

_ATTACKS = ("counting", "timing-interval", "path-tracing", "dropping",
            "random-guess")

_DEFAULTS = {
    "n": 2, "lmax": 1, "beta": None, "p": None, "p_real": None,
    "lexp": None, "relays": 0, "threshold": 0, "copies": 1, "rounds": None,
    "integrated": False, "cp": 0, "ca": 0, "out": 1, "hops": 1, "mu": 1,
    "lam": 256.0, "poly_lambda": None, "notion": "SO", "length": None,
    "trials": 10000, "seed": 0, "workers": None, "tol": 0.02,
    "mode": "general", "preset": None, "grid": False,
    "lmax_range": "2:10", "beta_range": "0.01:0.99:25", "basis": "trilemma",
    "bound": None, "kind": None, "protocol": None, "attack": None,
}


def _add_common(sp):
    sp.add_argument("--config", help="JSON file with flat default values")
    sp.add_argument("--n", type=int)
    sp.add_argument("--lmax", type=int)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--p", type=float,
                    help="total send rate; shorthand for beta=p, p-real=0")
    sp.add_argument("--lam", type=float)
    sp.add_argument("--poly-lambda", dest="poly_lambda", type=float)
    sp.add_argument("--cp", type=int, help="passively compromised relays")


def _build_parser():
    top = _Parser(prog="acnbounds", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    _add_common(b)
    b.add_argument("--kind", choices=_BOUND_KINDS)
    b.add_argument("--relays", type=int)
    b.add_argument("--out", type=int, help="delivered messages")
    b.add_argument("--hops", type=int)
    b.add_argument("--mu", type=int, help="messages per user")
    b.add_argument("--lexp", type=float)
    b.add_argument("--basis", choices=("trilemma", "counting", "dropping"))

    for name in ("simulate", "verify"):
        s = sub.add_parser(name, help=f"{name} an attack's advantage")
        _add_common(s)
        s.add_argument("--protocol", choices=VARIANTS)
        s.add_argument("--attack", choices=_ATTACKS)
        s.add_argument("--notion")
        s.add_argument("--length", type=int)
        s.add_argument("--p-real", dest="p_real", type=float)
        s.add_argument("--lexp", type=int)
        s.add_argument("--relays", type=int)
        s.add_argument("--threshold", type=int)
        s.add_argument("--copies", type=int)
        s.add_argument("--rounds", type=int)
        s.add_argument("--integrated", action="store_true", default=None)
        s.add_argument("--ca", type=int, help="actively controlled relays")
        s.add_argument("--trials", type=int)
        s.add_argument("--seed", type=int)
        s.add_argument("--workers", type=int)
        if name == "verify":
            s.add_argument("--tol", type=float)

    r = sub.add_parser("region", help="possible/impossible at a point")
    _add_common(r)
    r.add_argument("--bound", choices=("counting", "trilemma", "dropping"))

    a = sub.add_parser("atlas", help="preset verdicts or a CSV grid")
    _add_common(a)
    a.add_argument("--mode", choices=atlas_mod.MODES)
    a.add_argument("--preset", choices=sorted(atlas_mod.PRESETS))
    a.add_argument("--grid", action="store_true", default=None)
    a.add_argument("--lmax-range", dest="lmax_range",
                   help="lo:hi inclusive integer range")
    a.add_argument("--beta-range", dest="beta_range",
                   help="lo:hi:steps linear range")
    return top


_PER_COMMAND = {
    "atlas": {"n": 1000},
    "region": {"n": 1000},
}


def _resolve(args) -> SimpleNamespace:
    merged = dict(_DEFAULTS)
    merged.update(_PER_COMMAND.get(args.command, {}))
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        with open(cfg_path) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a flat JSON object")
        unknown = set(cfg) - set(_DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    for k, v in vars(args).items():
        if k in ("command", "config"):
            continue
        if v is not None:
            merged[k] = v
    return SimpleNamespace(**merged)


def _protocol_params(ns) -> ProtocolParams:
    beta = ns.beta
    p_real = ns.p_real
    if ns.p is not None and beta is None and p_real is None:
        beta, p_real = ns.p, 0.0
    return ProtocolParams(
        n=ns.n, l_max=ns.lmax, beta=beta or 0.0, p_real=p_real or 0.0,
        l_exp=ns.lexp, relays=ns.relays or 0, threshold=ns.threshold or 0,
        copies=ns.copies or 1, rounds=ns.rounds,
        integrated=bool(ns.integrated))


def _make_attack(ns):
    a = ns.attack
    if a == "counting":
        return counting_attack(ns.n)
    if a == "timing-interval":
        return timing_attack(ns.n)
    if a == "path-tracing":
        return tracing_attack(ns.n, ns.cp)
    if a == "dropping":
        return dropping_attack(ns.n, ns.ca)
    if a == "random-guess":
        return random_guess_attack()
    raise ConfigError("simulate needs --attack")


def _cmd_bound(ns) -> int:
    kind = ns.kind
    if kind is None:
        raise ConfigError("bound needs --kind")
    beta = ns.beta if ns.beta is not None else 0.0
    p = ns.p if ns.p is not None else 0.0
    out = {"kind": kind}
    if kind == "trilemma-sync":
        out["delta"] = bounds.trilemma_advantage(bounds.SYNC, ns.lmax,
                                                 beta=beta, n=ns.n)
    elif kind == "trilemma-unsync-original":
        out["delta"] = bounds.trilemma_advantage(bounds.UNSYNC_ORIGINAL,
                                                 ns.lmax, p=p)
    elif kind == "trilemma-unsync-improved":
        out["delta"] = bounds.trilemma_advantage(bounds.UNSYNC_IMPROVED,
                                                 ns.lmax, p=p)
    elif kind == "compromising-sync":
        out["delta"] = bounds.trilemma_compromising(
            bounds.SYNC, ns.lmax, beta=beta, n=ns.n, c_p=ns.cp,
            relays=ns.relays or max(ns.cp, 1))
    elif kind == "compromising-unsync":
        out["delta"] = bounds.trilemma_compromising(
            bounds.UNSYNC_IMPROVED, ns.lmax, p=p, c_p=ns.cp,
            relays=ns.relays or max(ns.cp, 1))
    elif kind == "counting":
        r = bounds.counting_bound(ns.out, ns.hops)
        out.update(min_messages=r.min_messages,
                   overhead_fraction=r.overhead_fraction)
    elif kind == "optimality":
        out["total"] = bounds.optimality_overhead(ns.n, ns.mu)
    elif kind == "onion-cost":
        out.update(bounds.onion_cost(ns.basis, ns.n, ns.lam, p=p or 1.0,
                                     l_exp=ns.lexp))
    print(json.dumps(out, sort_keys=True))
    return 0


def _run_game(ns):
    params = _protocol_params(ns)
    if ns.protocol is None:
        raise ConfigError("need --protocol")
    kind = ProtocolKind(ns.protocol, params)
    notion = parse_notion(ns.notion)
    pair = generate_pair(notion, params, ns.seed, length=ns.length)
    attack = _make_attack(ns)
    est = estimate_advantage(kind, attack, pair, ns.trials, ns.seed,
                             workers=ns.workers)
    return kind, attack, pair, est


def _cmd_simulate(ns) -> int:
    kind, attack, pair, est = _run_game(ns)
    print(record_json(result_record(kind, attack, pair, est, ns.seed)))
    return 0


def _expected_advantage(ns, kind, attack):
    proto, att = kind.variant, attack.variant
    params = kind.params
    if proto == "trilemma-sync" and att == "timing-interval":
        return bounds.trilemma_advantage(bounds.SYNC, params.l_max,
                                         beta=params.beta, n=params.n), "floor"
    if proto == "trilemma-unsync" and att == "timing-interval":
        return bounds.trilemma_advantage(bounds.UNSYNC_IMPROVED, params.l_max,
                                         p=params.p), "floor"
    if proto == "broadcast-full-dummy" and att == "counting":
        return 0.0, "exact"
    if proto == "dropping-model" and att == "dropping":
        pool = params.n if params.integrated else params.relays
        return dropping_success_rate(attack.capability.c_a, params.copies,
                                     pool), "exact"
    raise ConfigError(f"no reference value for {proto} with {att}")


def _cmd_verify(ns) -> int:
    kind, attack, pair, est = _run_game(ns)
    expected, check = _expected_advantage(ns, kind, attack)
    tol = ns.tol
    if check == "floor":
        # the formula is a lower bound that the built-in attack must reach
        ok = est.ci_high + tol >= expected
    else:
        ok = est.ci_low - tol <= expected <= est.ci_high + tol
    record = result_record(kind, attack, pair, est, ns.seed)
    record.update(expected=expected, tolerance=tol, check=check,
                  verdict="pass" if ok else "fail")
    print(record_json(record))
    return 0 if ok else 2


def _cmd_region(ns) -> int:
    if ns.bound is None:
        raise ConfigError("region needs --bound")
    verdict = bounds.impossibility_region(
        ns.bound, ns.n, ns.lmax, beta=ns.beta, p=ns.p,
        poly_lambda=ns.poly_lambda, lam=ns.lam, c_p=ns.cp)
    print(json.dumps({
        "bound": ns.bound, "n": ns.n, "l_max": ns.lmax, "beta": ns.beta,
        "p": ns.p, "verdict": verdict.verdict, "threshold": verdict.threshold,
        "condition": verdict.condition}, sort_keys=True))
    return 0


def _parse_ranges(ns):
    lo, hi = (int(x) for x in ns.lmax_range.split(":"))
    lmaxes = range(lo, hi + 1)
    a, b, steps = ns.beta_range.split(":")
    a, b, steps = float(a), float(b), int(steps)
    if steps < 2:
        betas = [a]
    else:
        betas = [a + (b - a) * i / (steps - 1) for i in range(steps)]
    return lmaxes, betas


def _cmd_atlas(ns) -> int:
    if ns.grid:
        lmaxes, betas = _parse_ranges(ns)
        for line in atlas_mod.emit_grid(lmaxes, betas, n=ns.n, lam=ns.lam,
                                        poly_lambda=ns.poly_lambda):
            print(line)
        return 0
    names = [ns.preset] if ns.preset else sorted(atlas_mod.PRESETS)
    rows = [atlas_mod.classify(atlas_mod.PRESETS[x], ns.mode, n=ns.n,
                               lam=ns.lam, poly_lambda=ns.poly_lambda)
            for x in names]
    print(json.dumps(rows, sort_keys=True, indent=2))
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        ns = _resolve(args)
        if args.command == "bound":
            return _cmd_bound(ns)
        if args.command == "simulate":
            return _cmd_simulate(ns)
        if args.command == "verify":
            return _cmd_verify(ns)
        if args.command == "region":
            return _cmd_region(ns)
        if args.command == "atlas":
            return _cmd_atlas(ns)
        raise ConfigError(f"unknown command {args.command!r}")
    except (ConfigError, CapabilityError, ValueError, OSError) as exc:
        print(f"acnbounds: {exc}", file=sys.stderr)
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
