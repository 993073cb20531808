"""Command-line front end: ``doflab <command> [options]``.

Commands: bounds, chain, certify, align, curve, multilook. Rationals are
printed as "p/q" strings. Exit codes: 0 success, 2 usage error, 3 degraded
chain or failed certificate/verification. ``DOF_LAB_SEED`` sets the default
seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from math import gcd
from pathlib import Path

from . import alignment as al
from . import dof_formulas as df
from . import multilook as ml
from . import subspace as sp
from ._rng import sub_seed
from .genie_chain import (
    ChainError,
    ChainScript,
    builtin_names,
    builtin_script,
    run_algorithm1,
    run_algorithm2,
    run_script,
    script_network,
)
from .genie_chain.certify import REGIMES, certify_structured, regime_points
from .genie_chain.scripts import ALGORITHM_NAMES
from .network import FULL_IC, MANY_TO_ONE, generate_generic

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 2, 3

CERTIFY_COLUMNS = ["M", "N", "regime", "pass", "bound", "expected", "steps", "error"]
CURVE_COLUMNS = [
    "gamma",
    "M",
    "N",
    "counting_over_N",
    "decomposition_over_N",
    "dstar_over_N",
    "best_known_over_N",
    "status",
    "regime",
]


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("DOF_LAB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"DOF_LAB_SEED must be an integer, got {raw!r}") from None


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _dump_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: "" if r.get(c) is None else r.get(c) for c in columns})
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- bounds


def cmd_bounds(args) -> int:
    _need(args, "k", "mt", "mr")
    rep = df.classify(args.k, args.mt, args.mr, verify_trials=args.verify)
    d = rep.to_json()
    if args.format == "csv":
        _emit(args, _dump_csv(list(d), [d]))
    else:
        _emit(args, _dump_json(d))
    return EXIT_OK


# ---------------------------------------------------------------- chain


def _load_script(name: str, args) -> ChainScript | str:
    if name in ALGORITHM_NAMES:
        return name
    p = Path(name)
    if p.suffix == ".json" and p.exists():
        return ChainScript.from_json(p.read_text())
    params = {}
    if name == "chain_8_21" and args.scale:
        params["a"] = args.scale
    elif name.startswith("four_to_one") and args.mt and args.mr:
        params = {"M": args.mt, "N": args.mr}
    try:
        return builtin_script(name, **params)
    except ChainError:
        raise UsageError(f"unknown script {name!r}; builtins: {', '.join(builtin_names())}") from None


def _chain_job(job: tuple) -> dict:
    name, script_json, mt, mr, seed, backend, genie = job
    if script_json is None:
        _, _, dmt, dmr = ALGORITHM_NAMES[name]
        M_T, M_R = mt or dmt, mr or dmr
        net = generate_generic(FULL_IC, 4, M_T, M_R, seed, backend)
        run = run_algorithm1 if name == "alg1" else run_algorithm2
        ledger = run(net, genie_mode=genie, seed=seed)
        shape = {"topology": FULL_IC, "K": 4, "M_T": M_T, "M_R": M_R}
        expected = df.decomposition_bound(min(M_T, M_R), max(M_T, M_R))
    else:
        script = ChainScript.from_json(script_json)
        net = script_network(script, seed, backend)
        ledger = run_script(net, script, genie_mode=genie, seed=seed)
        shape = {"topology": script.topology, "K": script.K, "M_T": script.M_T, "M_R": script.M_R}
        expected = script.expected
    out = {"script": name, "seed": seed, "backend": backend, "genie_mode": genie, "network": shape}
    out["expected"] = None if expected is None else str(expected)
    out.update(ledger.to_json())
    return out


def cmd_chain(args) -> int:
    if not args.script:
        raise UsageError("chain needs --script (a builtin name or a .json script file)")
    s = _load_script(args.script, args)
    name = s if isinstance(s, str) else s.name
    sj = None if isinstance(s, str) else json.dumps(s.to_json())
    if args.sweep:
        seeds = [sub_seed(args.seed, i) for i in range(args.sweep)]
    else:
        seeds = [args.seed]
    jobs = [(name, sj, args.mt, args.mr, sd, args.backend, args.genie) for sd in seeds]
    try:
        results = _map(_chain_job, jobs, args.jobs)
    except ChainError as e:
        raise UsageError(str(e)) from None
    payload = results[0] if not args.sweep else {"script": name, "master_seed": args.seed, "runs": results}
    _emit(args, _dump_json(payload))
    bad = any(r["degraded"] or r["bound"] is None for r in results)
    return EXIT_FAILED if bad else EXIT_OK


def _map(fn, items: list, jobs: int) -> list:
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------- certify


def _certify_job(job: tuple) -> dict:
    M, N, regime, seed = job
    rep = certify_structured(M, N, regime, seed)
    return {
        "M": M,
        "N": N,
        "regime": regime,
        "pass": rep.passed,
        "bound": None if rep.bound is None else str(rep.bound),
        "expected": str(rep.expected),
        "steps": len(rep.steps),
        "error": rep.error,
        "detail": rep.to_json(),
    }


def cmd_certify(args) -> int:
    if args.regime not in REGIMES:
        raise UsageError(f"--regime must be one of {REGIMES}")
    pts = regime_points(args.regime, args.max)
    rows = _map(_certify_job, [(M, N, args.regime, args.seed) for M, N in pts], args.jobs)
    if args.format == "json":
        _emit(args, _dump_json([r["detail"] for r in rows]))
    else:
        _emit(args, _dump_csv(CERTIFY_COLUMNS, [{**r, "pass": str(r["pass"]).lower()} for r in rows]))
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAILED


# ---------------------------------------------------------------- align


def cmd_align(args) -> int:
    if args.design == "k_user":
        K, b = args.k or 4, args.beta
        net = generate_generic(FULL_IC, K, b * K, b * (K * K - K - 1), args.seed, args.backend)
        pre = al.design_k_user(net, b)
    else:
        if args.case not in al.FOUR_TO_ONE_CASES:
            raise UsageError(f"--case must be one of {list(al.FOUR_TO_ONE_CASES)}")
        m, n, _ = al.FOUR_TO_ONE_CASES[args.case]
        net = generate_generic(MANY_TO_ONE, 4, m * args.beta, n * args.beta, args.seed, args.backend)
        pre = al.design_four_to_one(net, args.case)
    rep = al.verify_alignment(net, pre)
    out = {
        "design": args.design,
        "K": net.K,
        "M_T": net.M_T,
        "M_R": net.M_R,
        "seed": args.seed,
        "d": pre.d,
        "null_dims": {str(k): v for k, v in pre.meta.get("null_dims", {}).items()},
        "verification": rep.to_json(),
    }
    if args.precoders:
        out["precoders"] = pre.to_json()
    _emit(args, _dump_json(out))
    return EXIT_OK if rep.passed else EXIT_FAILED


# ---------------------------------------------------------------- curve


def curve_rows(K: int, max_n: int) -> list[dict]:
    """One row per reduced gamma = M/N in (0, 1] with N <= max_n."""
    pts = sorted({Fraction(M, N) for N in range(1, max_n + 1) for M in range(1, N + 1) if gcd(M, N) == 1})
    rows = []
    for g in pts:
        M, N = g.numerator, g.denominator
        rep = df.classify(K, M, N)

        def per_n(x):
            return None if x is None else str(x / N)

        rows.append(
            {
                "gamma": str(g),
                "M": M,
                "N": N,
                "counting_over_N": per_n(rep.counting),
                "decomposition_over_N": per_n(rep.decomposition),
                "dstar_over_N": per_n(rep.dstar),
                "best_known_over_N": per_n(rep.best_known),
                "status": rep.status,
                "regime": rep.regime,
            }
        )
    return rows


def cmd_curve(args) -> int:
    _need(args, "k")
    if args.k < 4:
        raise UsageError("curve needs --k >= 4")
    rows = curve_rows(args.k, args.max)
    _emit(args, _dump_json(rows) if args.format == "json" else _dump_csv(CURVE_COLUMNS, rows))
    return EXIT_OK


# ---------------------------------------------------------------- multilook


def cmd_multilook(args) -> int:
    if args.input:
        data = json.loads(Path(args.input).read_text())
        M = int(data["ambient"])
        subs = [sp.from_columns(M, vecs) for vecs in data["subspaces"]]
    elif args.dims:
        M = args.m
        if not M:
            raise UsageError("--dims needs --m (ambient dimension)")
        dims = [int(x) for x in args.dims.split(",")]
        subs = [sp.random_generic(M, dm, sub_seed(args.seed, i)) for i, dm in enumerate(dims)]
    else:
        M, subs = ml.EXAMPLE_AMBIENT, ml.example_subspaces()
    res = ml.build_full_sets(subs, M)
    out = {"ambient": M, "dims": [s.dim for s in subs]}
    out.update(res.to_json())
    _emit(args, _dump_json(out))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"missing required option(s): {' '.join(missing)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--k", type=int, help="number of users K")
    common.add_argument("--mt", type=int, help="transmit antennas M_T")
    common.add_argument("--mr", type=int, help="receive antennas M_R")
    common.add_argument("--seed", type=int, default=None, help="master seed (default: $DOF_LAB_SEED or 0)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default=None)
    common.add_argument("--jobs", type=int, default=1, help="worker processes for sweeps")

    p = argparse.ArgumentParser(prog="doflab", description="DoF bounds, genie chains and alignment checks.")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common], help="closed-form bounds and proof status")
    b.add_argument("--verify", type=int, default=0, help="seeded chain trials for 1/2 <= M/N < 1 points")

    c = sub.add_parser("chain", parents=[common], help="run a genie chain and print its ledger")
    c.add_argument("--script", help=f"builtin ({', '.join(builtin_names())}) or a .json script file")
    c.add_argument("--backend", choices=["float", "rational"], default="float")
    c.add_argument("--genie", choices=["random", "coordinate"], default="random")
    c.add_argument("--scale", type=int, help="scale a of the chain_8_21 script")
    c.add_argument("--sweep", type=int, default=0, help="run this many derived seeds")

    ce = sub.add_parser("certify", parents=[common], help="exact certificates on structured channels")
    ce.add_argument("--regime", required=True)
    ce.add_argument("--max", type=int, default=40, help="largest N")

    a = sub.add_parser("align", parents=[common], help="build and verify alignment precoders")
    a.add_argument("--design", choices=["k_user", "four_to_one"], default="k_user")
    a.add_argument("--beta", type=int, default=1)
    a.add_argument("--case", default="4/9", help="four-to-one case: 4/9, 3/5 or 5/6")
    a.add_argument("--backend", choices=["float", "rational"], default="float")
    a.add_argument("--precoders", action="store_true", help="include the precoder matrices")

    cu = sub.add_parser("curve", parents=[common], help="d/N against gamma = M/N")
    cu.add_argument("--max", type=int, default=20, help="largest denominator N")

    m = sub.add_parser("multilook", parents=[common], help="pack subspaces into complete sets")
    m.add_argument("--input", help='JSON {"ambient": M, "subspaces": [[vector, ...], ...]}')
    m.add_argument("--dims", help="comma-separated dimensions of seeded generic subspaces")
    m.add_argument("--m", type=int, help="ambient dimension for --dims")
    return p


_DEFAULT_FORMAT = {"certify": "csv", "curve": "csv"}

COMMANDS = {
    "bounds": cmd_bounds,
    "chain": cmd_chain,
    "certify": cmd_certify,
    "align": cmd_align,
    "curve": cmd_curve,
    "multilook": cmd_multilook,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    try:
        if args.seed is None:
            args.seed = _default_seed()
        if args.format is None:
            args.format = _DEFAULT_FORMAT.get(args.command, "json")
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as e:
        print(f"doflab {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
