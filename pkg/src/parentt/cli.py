"""Command-line front end: prime search, multiplication, simulation, bench.

Exit codes: 0 success, 1 verification failure, 2 configuration error.
All randomness is drawn from a seeded generator so any failure reproduces
from the printed seed.  PARENTT_OUT defines the default output directory.
"""

import argparse
import hashlib
import json
import os
import random
import sys
import time
from pathlib import Path

from . import pipesim, primeforge, rnspoly
from .nttref import NttParams, ResiduePoly, polymul_ntt

# Published prime counts being reproduced: (t, v, mu, pot, n) -> count.
TABLE3_ROWS = [
    (4, 45, 105, 4, 4096, 12),
    (4, 45, 120, 4, 4096, 33),
    (4, 45, 105, 5, 4096, 126),
    (4, 45, 120, 5, 4096, 480),
    (6, 30, 75, 4, 4096, 8),
    (6, 30, 90, 4, 4096, 26),
    (6, 30, 75, 5, 4096, 23),
    (6, 30, 90, 5, 4096, 169),
]
# Deepest uninterrupted SAU run in both published datapaths: the four-modulus
# unit breaks its longest chain with an interior reduction, the six-modulus
# one factorizes into blocks of three.  All eight counts reproduce with 2.
TABLE3_N_BETA = 2

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2


class ConfigError(Exception):
    pass


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("PARENTT_OUT", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, indent=2)
    if getattr(args, "output", None):
        (_out_dir(args) / args.output).write_text(text + "\n")
    else:
        print(text)


def _power_of_two(value: str) -> int:
    n = int(value)
    if n < 4 or n & (n - 1):
        raise argparse.ArgumentTypeError("must be a power of two >= 4")
    return n


# ---------------------------------------------------------------------------
# primes
# ---------------------------------------------------------------------------

def cmd_primes(args) -> int:
    if args.table3:
        rows = []
        all_match = True
        for t, v, mu, pot, n, published in TABLE3_ROWS:
            primes = primeforge.search_special_primes(v, n, mu, pot,
                                                      TABLE3_N_BETA)
            eps_bits = primes[0].barrett.epsilon_bits if primes else 0
            match = len(primes) == published
            all_match &= match
            rows.append({"t": t, "v": v, "mu": mu, "pot": pot, "n": n,
                         "epsilon_bits": eps_bits, "count": len(primes),
                         "published": published, "match": match})
        _emit(args, {
            "n_beta": TABLE3_N_BETA,
            "note": ("counts reproduced with the width constraint "
                     "v + n_beta*(v1+1) + 1 <= mu at SAU depth "
                     f"n_beta = {TABLE3_N_BETA} for every row"),
            "rows": rows,
        })
        return EXIT_OK if all_match else EXIT_VERIFY
    if args.v is None or args.mu is None:
        raise ConfigError("primes needs --v and --mu (or --table3)")
    primes = primeforge.search_special_primes(args.v, args.n, args.mu,
                                              args.pot, args.n_beta)
    payload = json.loads(primeforge.primes_to_json(args.v, args.n, args.mu,
                                                   args.n_beta, primes))
    payload["count"] = len(primes)
    _emit(args, payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# multiply
# ---------------------------------------------------------------------------

def _build_ctx(args) -> rnspoly.RnsContext:
    if args.t % args.t_prime:
        raise ConfigError("t must be divisible by t-prime")
    mu = args.mu if args.mu is not None else 2 * args.v + 15
    if mu < 2 * args.v:
        raise ConfigError("mu must be at least 2v")
    return rnspoly.build_context(v=args.v, t=args.t, t_prime=args.t_prime,
                                 n=args.n, mu=mu,
                                 max_pot_terms=args.pot, n_beta=args.n_beta)


def cmd_multiply(args) -> int:
    ctx = _build_ctx(args)
    a = rnspoly.BigPoly.from_hex_lines(Path(args.a).read_text(), ctx.n, ctx.q)
    b = rnspoly.BigPoly.from_hex_lines(Path(args.b).read_text(), ctx.n, ctx.q)
    if args.simulate:
        mult = _pipeline_channel_multiplier()
        prod = rnspoly.parentt_multiply(a, b, ctx, channel_multiplier=mult)
    else:
        prod = rnspoly.parentt_multiply(a, b, ctx)
    out_path = _out_dir(args) / (args.output or "product.hex")
    out_path.write_text(prod.to_hex_lines())
    if args.verify:
        want = rnspoly.kronecker_negacyclic_wide(a.coeffs, b.coeffs, ctx.q)
        if prod.coeffs != want:
            print("verification FAILED against the wide-integer oracle",
                  file=sys.stderr)
            return EXIT_VERIFY
        print(f"verified against wide-integer oracle; wrote {out_path}")
    else:
        print(f"wrote {out_path}")
    return EXIT_OK


def _pipeline_channel_multiplier():
    """Channel multiplier that streams through the cycle-accurate pipeline."""
    def mult(a: ResiduePoly, b: ResiduePoly, params: NttParams) -> ResiduePoly:
        model = pipesim.build_cascade(params)
        a_stream = pipesim.make_input_stream(model, [a.coeffs])
        b_stream = pipesim.make_b_ntt_stream(model, [b.coeffs])
        out, _ = pipesim.simulate(model, a_stream, b_stream)
        return ResiduePoly(pipesim.gather_output(model, out, 1)[0], "time")
    return mult


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    rng = random.Random(args.seed)
    q = args.q
    if q is None:
        pool = primeforge.search_special_primes(30, args.n, 75, 5, 2)
        if not pool:
            raise ConfigError(f"no default special prime for n={args.n}; "
                              f"pass --q")
        q = pool[0].q
    p = NttParams.create(q, args.n)
    num_pes = 2 * p.m + 1
    pipe = pipesim.PipeConfig.uniform(args.t_pipe, num_pes)
    model = pipesim.build_cascade(p, pipe, dual_chain=args.dual_chain)
    if args.dump_schedule:
        _emit(args, {"ntt": model.ntt_sched.to_json_dict(),
                     "intt": model.intt_sched.to_json_dict()})
        return EXIT_OK

    blocks = [[rng.randrange(q) for _ in range(args.n)]
              for _ in range(args.blocks)]
    b_blocks = [[rng.randrange(q) for _ in range(args.n)]
                for _ in range(args.blocks)]
    a_stream = pipesim.make_input_stream(model, blocks)
    if args.dual_chain:
        b_stream = pipesim.make_input_stream(model, b_blocks)
    else:
        b_stream = pipesim.make_b_ntt_stream(model, b_blocks)

    try:
        if args.trace:
            out, report, trace = pipesim.simulate(model, a_stream, b_stream,
                                                  collect_trace=True)
            trace_path = _out_dir(args) / "trace.csv"
            trace_path.write_text(pipesim.trace_to_csv(trace))
            print(f"trace written to {trace_path}", file=sys.stderr)
        else:
            out, report = pipesim.simulate(model, a_stream, b_stream)
    except pipesim.ScheduleViolation as exc:
        print(f"schedule violation: {exc}", file=sys.stderr)
        return EXIT_VERIFY

    got = pipesim.gather_output(model, out, args.blocks)
    for i in range(args.blocks):
        want = polymul_ntt(ResiduePoly(blocks[i]), ResiduePoly(b_blocks[i]),
                           p).coeffs
        if got[i] != want:
            print(f"block {i} output mismatch vs reference", file=sys.stderr)
            return EXIT_VERIFY

    payload = {"q": q, "seed": args.seed, "cascade": report.to_json_dict()}
    if args.baseline:
        _, base_report = pipesim.simulate_shuffled_baseline(
            model, a_stream, b_stream)
        payload["baseline"] = base_report.to_json_dict()
        payload["baseline_excess"] = (base_report.latency_cycles
                                      - report.latency_cycles)
    _emit(args, payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def cmd_bench(args) -> int:
    rng = random.Random(args.seed)
    rows = []
    for n in args.sizes:
        ctx = rnspoly.build_context(v=args.v, t=args.t, t_prime=args.t_prime,
                                    n=n, mu=2 * args.v + 15,
                                    max_pot_terms=args.pot,
                                    n_beta=args.n_beta)
        a = rnspoly.BigPoly([rng.randrange(ctx.q) for _ in range(n)])
        b = rnspoly.BigPoly([rng.randrange(ctx.q) for _ in range(n)])
        t0 = time.perf_counter()
        reps = max(1, args.reps)
        for _ in range(reps):
            prod = rnspoly.parentt_multiply(a, b, ctx)
        dt = (time.perf_counter() - t0) / reps
        verified = (prod.coeffs ==
                    rnspoly.kronecker_negacyclic_wide(a.coeffs, b.coeffs,
                                                      ctx.q))
        digest = hashlib.sha256(
            ",".join(map(str, prod.coeffs)).encode()).hexdigest()[:16]
        rows.append({"n": n, "t": args.t, "v": args.v,
                     "seconds_per_multiply": round(dt, 6),
                     "verified": verified, "digest": digest})
    _emit(args, {"seed": args.seed, "rows": rows})
    if not all(r["verified"] for r in rows):
        return EXIT_VERIFY
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parentt",
        description="long polynomial modular multiplication over "
                    "Z_q[x]/(x^n+1) via CRT + streaming NTT pipelines")
    ap.add_argument("--out-dir", help="output directory (default $PARENTT_OUT "
                                      "or the working directory)")
    sub = ap.add_subparsers(dest="command", required=True)

    pp = sub.add_parser("primes", help="search special primes")
    pp.add_argument("--v", type=int, help="modulus word-length")
    pp.add_argument("--n", type=_power_of_two, default=4096)
    pp.add_argument("--mu", type=int, help="Barrett input width")
    pp.add_argument("--pot", type=int, default=4,
                    help="max signed power-of-two terms in q")
    pp.add_argument("--n-beta", type=int, default=2,
                    help="deepest uninterrupted SAU chain")
    pp.add_argument("--table3", action="store_true",
                    help="reproduce the published prime-count table")
    pp.add_argument("--output", help="write JSON here instead of stdout")
    pp.set_defaults(func=cmd_primes)

    mp = sub.add_parser("multiply", help="multiply two hex coefficient files")
    mp.add_argument("a")
    mp.add_argument("b")
    mp.add_argument("--n", type=_power_of_two, default=4096)
    mp.add_argument("--v", type=int, default=30)
    mp.add_argument("--t", type=int, default=6)
    mp.add_argument("--t-prime", type=int, default=3)
    mp.add_argument("--mu", type=int)
    mp.add_argument("--pot", type=int, default=5)
    mp.add_argument("--n-beta", type=int, default=2)
    mp.add_argument("--verify", action="store_true",
                    help="check against the wide-integer oracle")
    mp.add_argument("--simulate", action="store_true",
                    help="run channels through the cycle-accurate pipeline")
    mp.add_argument("--output", help="product file name (default product.hex)")
    mp.set_defaults(func=cmd_multiply)

    sp = sub.add_parser("simulate", help="run the streaming pipeline")
    sp.add_argument("--n", type=_power_of_two, default=4096)
    sp.add_argument("--q", type=int, help="modulus (default: first special "
                                          "30-bit prime for n)")
    sp.add_argument("--t-pipe", type=int, default=0)
    sp.add_argument("--blocks", type=int, default=1)
    sp.add_argument("--baseline", action="store_true",
                    help="also time the conventional shuffled design")
    sp.add_argument("--dual-chain", action="store_true",
                    help="simulate both forward chains")
    sp.add_argument("--trace", action="store_true",
                    help="write per-cycle trace.csv")
    sp.add_argument("--dump-schedule", action="store_true")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", help="write JSON here instead of stdout")
    sp.set_defaults(func=cmd_simulate)

    bp = sub.add_parser("bench", help="wall-clock multiplier throughput")
    bp.add_argument("--sizes", type=_power_of_two, nargs="+",
                    default=[1024, 2048, 4096])
    bp.add_argument("--v", type=int, default=30)
    bp.add_argument("--t", type=int, default=6)
    bp.add_argument("--t-prime", type=int, default=3)
    bp.add_argument("--pot", type=int, default=5)
    bp.add_argument("--n-beta", type=int, default=2)
    bp.add_argument("--reps", type=int, default=1)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--output", help="write JSON here instead of stdout")
    bp.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
