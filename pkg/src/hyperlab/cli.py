"""Command line runner: every check as a subcommand with JSON/CSV output.

Exit status: 0 definitive verdict (PASS, EVIDENCE_HYPERCYCLIC, VIOLATED),
2 failed or undetermined at the horizon, 1 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys

import numpy as np

from . import criterion as crit
from . import hardy, moebius, shift
from ._parallel import map_chunks
from .errors import HyperlabError, InputError
from .parsing import parse_complex, parse_function, parse_symbol, parse_vector
from .report import Report, Verdict, dumps
from .seqspace import Axis, IndexWindow, WeakNeighborhood, WindowVector, norm, weak_member

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED = 0, 1, 2

PRECEDENCE_NOTE = "values from --config FILE are defaults; command line flags override them"


_REAL = r"(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?"
# argparse only treats "-0.5" style tokens as values; complex literals such as "-0.5j" or "-1+2i" count too
_NEGATIVE_NUMBER = re.compile(rf"^-{_REAL}([-+]{_REAL})?[ij]?$")


class _Parser(argparse.ArgumentParser):
    """Routes usage errors through the input-error exit status."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._negative_number_matcher = _NEGATIVE_NUMBER

    def error(self, message):
        raise InputError(message)


# shared option groups -------------------------------------------------------


def _global_options(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="RNG seed for randomized suites")
    parser.add_argument("--format", choices=["json", "csv"], default=d("json"))
    parser.add_argument("--out", default=d("-"), help="output path, '-' for stdout")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for sweeps")
    parser.add_argument("--config", default=d(None), help="JSON file of option defaults")


def _weight_options(parser):
    g = parser.add_argument_group("weights")
    side = g.add_mutually_exclusive_group()
    side.add_argument("--unilateral", dest="axis", action="store_const", const="N")
    side.add_argument("--bilateral", dest="axis", action="store_const", const="Z")
    rule = g.add_mutually_exclusive_group()
    rule.add_argument("--constant", type=float)
    rule.add_argument("--periodic", type=float, nargs="+")
    rule.add_argument("--piecewise", type=float, nargs=2, metavar=("NEG", "POS"))
    rule.add_argument("--weights", help="WeightSequence JSON file")
    g.add_argument("--breakpoint", type=int, default=0)


def _weights_from(args, default_axis="Z") -> shift.WeightSequence:
    if getattr(args, "weights", None):
        with open(args.weights) as fh:
            return shift.WeightSequence.from_dict(json.load(fh))
    axis = Axis(args.axis or default_axis)
    if args.constant is not None:
        return shift.WeightSequence.constant(args.constant, axis)
    if args.periodic:
        return shift.WeightSequence.periodic(args.periodic, axis)
    if args.piecewise:
        return shift.WeightSequence.piecewise(*args.piecewise, breakpoint=args.breakpoint, axis=axis)
    raise InputError("no weights given: use --constant, --periodic, --piecewise or --weights")


# subcommands ----------------------------------------------------------------


def run_salas(args):
    w = _weights_from(args, default_axis="N")
    csv_out = args.format == "csv"
    if w.axis is Axis.NATURAL:
        return shift.salas_unilateral(w, args.horizon, args.threshold, args.threads, with_series=csv_out)
    return shift.salas_bilateral(w, shift.SalasQuery(args.eps, args.q, args.horizon), args.threads,
                                 with_series=csv_out)


def run_criterion(args):
    if not args.instance:
        raise InputError("criterion needs an instance file")
    with open(args.instance) as fh:
        inst = crit.CriterionInstance.from_dict(json.load(fh))
    return crit.check_criterion(inst, coord_tol=args.coord_tol, tol=args.tol, s_index=args.s_index)


def _loop_power(T, x, n):
    for _ in range(n):
        x = shift.apply(T, x)
    return x


def _random_vector(rng, axis, lo, hi, p):
    size = hi - lo + 1
    coeffs = rng.normal(size=size) + 1j * rng.normal(size=size)
    return WindowVector(IndexWindow(lo, hi, axis), coeffs, p)


def run_transitivity(args):
    w = _weights_from(args, default_axis="N")
    T = shift.BackwardShift(w)
    if args.random:
        return _transitivity_suite(T, args)
    if not (args.g_center and args.w_center and args.w_indices):
        raise InputError("need --g-center, --w-center and --w-indices (or --random K)")
    G = parse_vector(args.g_center, w.axis, args.p)
    W = WeakNeighborhood(parse_vector(args.w_center, w.axis, args.p), args.w_indices, args.w_eps)
    return crit.transitivity_witness(T, G, args.g_radius, W, args.horizon, args.min_n, args.M)


def _transitivity_suite(T, args):
    rng = np.random.default_rng(args.seed)
    lo = 1 if T.unilateral else -3
    cases = []
    for _ in range(args.random):
        G = _random_vector(rng, T.axis, lo, lo + 3, args.p)
        radius = float(rng.uniform(0.05, 1.0))
        center = _random_vector(rng, T.axis, lo, lo + 3, args.p)
        k = int(rng.integers(1, 5))
        idx = sorted(rng.choice(np.arange(lo, lo + 4), size=k, replace=False).tolist())
        W = WeakNeighborhood(center, idx, float(rng.uniform(0.01, 0.5)))
        cases.append((G, radius, W))

    def one(case):
        G, radius, W = case
        r = crit.transitivity_witness(T, G, radius, W, args.horizon, args.min_n, args.M)
        if r.verdict is not Verdict.PASS:
            return None, False
        x = WindowVector.from_dict(r.witness["x"], axis=T.axis)
        n = r.witness["n"]
        ok = norm(x - G) < radius and weak_member(_loop_power(T, x, n), W)
        return n, ok

    chunks = map_chunks(lambda lo, hi: [one(c) for c in cases[lo:hi]], 0, len(cases), args.threads)
    results = [r for chunk in chunks for r in chunk]
    found = [n is not None for n, _ in results]
    verified = [ok for _, ok in results]
    verdict = Verdict.PASS if all(verified) else Verdict.UNDETERMINED_AT_HORIZON
    return Report("transitivity_suite", verdict,
                  summary={"pairs": len(cases), "found": sum(found), "verified": sum(verified),
                           "horizon": args.horizon, "min_n": args.min_n, "seed": args.seed},
                  series={"n": [-1 if n is None else n for n, _ in results],
                          "pair": list(range(len(cases))), "verified": verified})


def run_refute(args):
    w = _weights_from(args, default_axis="Z")
    if args.doubling:
        nk, n = [], 1
        while n <= args.doubling:
            nk.append(n)
            n *= 2
    else:
        nk = args.nk or []
    if not nk:
        raise InputError("empty nk: give --nk or --doubling")
    return shift.refute_conjecture(w, nk, N_max=args.nmax, j_range=args.j_range)


def _symbol_from(args):
    if args.coeffs:
        return moebius.MoebiusMap(*(parse_complex(c) for c in args.coeffs))
    if args.symbol:
        return parse_symbol(args.symbol)
    raise InputError("give --coeffs a b c d or --symbol EXPR")


def _require_self_map(m):
    if not m.is_self_map():
        raise InputError("symbol is not a self-map of the unit disk")


def run_moebius(args):
    if args.action == "identity-check":
        if args.random:
            return _identity_suite(args)
        return moebius.parabolic_identity_check(parse_complex(args.a), parse_complex(args.z), args.n)
    m = _symbol_from(args)
    _require_self_map(m)
    if args.action == "classify":
        cls = moebius.classify(m)
        summary = cls.to_dict()
        if cls.kind is moebius.MapKind.PARABOLIC:
            try:
                summary["half_plane"] = moebius.to_half_plane(m).to_dict()
            except InputError as exc:
                summary["half_plane"] = str(exc)
        return Report("classify", Verdict.PASS, summary=summary)
    it = moebius.iterate(m, args.n)
    z = parse_complex(args.z)
    return Report("iterate", Verdict.PASS,
                  summary={"map": it.to_dict(), "z": z, "value": moebius.apply(it, z)},
                  series={"n": [args.n], "re": [moebius.apply(it, z).real], "im": [moebius.apply(it, z).imag]})


def _identity_suite(args):
    rng = np.random.default_rng(args.seed)
    K = args.random
    a = rng.uniform(1e-3, 5, K) + 1j * rng.uniform(-5, 5, K)
    r = 0.95 * np.sqrt(rng.uniform(size=K))
    z = r * np.exp(2j * np.pi * rng.uniform(size=K))
    n = rng.integers(1, args.n + 1, K)
    errs = []
    for ai, zi, ni in zip(a, z, n):
        rep = moebius.parabolic_identity_check(ai, zi, int(ni))
        errs.append(max(rep.summary["err_modulus"], rep.summary["err_difference"]))
    worst = float(max(errs))
    return Report("identity_suite", Verdict.PASS if worst < 1e-9 else Verdict.FAIL,
                  summary={"samples": K, "max_abs_error": worst, "n_max": args.n, "seed": args.seed},
                  series={"n": n, "max_error": errs})


def run_hardy(args):
    if args.action == "decay":
        f = parse_function(args.f)
        return hardy.orbit_decay(f, parse_complex(args.a), parse_complex(args.z), args.nmax, args.threads)
    if args.action == "estimate":
        if args.random:
            return _estimate_suite(args)
        f = parse_function(args.f)
        return hardy.growth_estimate_check(f, parse_complex(args.z), parse_complex(args.w))
    if args.action == "obstruct":
        m = _symbol_from(args)
        _require_self_map(m)
        p = parse_complex(args.p) if args.p is not None else None
        return hardy.fixed_point_obstruction(m, parse_function(args.f), args.N, p)
    grid = [parse_complex(g) for g in args.grid]
    return hardy.constant_cluster_check(parse_function(args.f), parse_complex(args.a), grid, args.n)


def _estimate_suite(args):
    rng = np.random.default_rng(args.seed)
    K = args.random
    violations, tight, ratios = 0, 0, []
    for _ in range(K):
        deg = int(rng.integers(0, args.degree + 1))
        f = hardy.HardyFunction(rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1))
        z, w = (0.999 * np.sqrt(rng.uniform(size=2)) * np.exp(2j * np.pi * rng.uniform(size=2)))
        rep = hardy.growth_estimate_check(f, z, w)
        violations += rep.verdict is not Verdict.PASS
        tight += rep.summary["near_tight"]
        ratios.append(rep.summary["lhs"] / rep.summary["rhs"] if rep.summary["rhs"] else 0.0)
    return Report("estimate_suite", Verdict.PASS if violations == 0 else Verdict.FAIL,
                  summary={"samples": K, "violations": violations, "near_tight": tight,
                           "max_ratio": max(ratios), "seed": args.seed},
                  series={"n": list(range(K)), "ratio": ratios})


# parser ---------------------------------------------------------------------


def build_parser():
    common = _Parser(add_help=False)
    _global_options(common, suppress=True)
    parser = _Parser(prog="hyperlab", description=__doc__, epilog=PRECEDENCE_NOTE,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    leaves = []

    p = sub.add_parser("salas", parents=[common], help="Salas product tests", epilog=PRECEDENCE_NOTE)
    _weight_options(p)
    p.add_argument("--horizon", type=int, default=1000)
    p.add_argument("--threshold", type=float, default=1e6, help="unilateral: product target")
    p.add_argument("--eps", type=float, default=0.1, help="bilateral epsilon")
    p.add_argument("--q", type=int, default=1, help="bilateral: check all |j| < q")
    p.set_defaults(run=run_salas)
    leaves.append(p)

    p = sub.add_parser("criterion", parents=[common], help="weak hypercyclicity criterion",
                       epilog=PRECEDENCE_NOTE)
    p.add_argument("instance", nargs="?", help="CriterionInstance JSON file")
    p.add_argument("--coord-tol", type=float, default=1e-9)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--s-index", choices=["nk", "k"], default="nk")
    p.set_defaults(run=run_criterion)
    leaves.append(p)

    p = sub.add_parser("transitivity", parents=[common], help="T^n G meets W witness search",
                       epilog=PRECEDENCE_NOTE)
    _weight_options(p)
    p.add_argument("--g-center")
    p.add_argument("--g-radius", type=float, default=0.5)
    p.add_argument("--w-center")
    p.add_argument("--w-indices", type=int, nargs="+")
    p.add_argument("--w-eps", type=float, default=0.1)
    p.add_argument("--horizon", type=int, default=64)
    p.add_argument("--min-n", type=int, default=0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--M", type=float, default=None)
    p.add_argument("--random", type=int, default=0, metavar="K", help="run K seeded random (G, W) pairs")
    p.set_defaults(run=run_transitivity)
    leaves.append(p)

    p = sub.add_parser("refute", parents=[common], help="conjecture refutation certificate",
                       epilog=PRECEDENCE_NOTE)
    _weight_options(p)
    p.add_argument("--nk", type=int, nargs="+")
    p.add_argument("--doubling", type=int, metavar="MAX", help="nk = 1, 2, 4, ... up to MAX")
    p.add_argument("--nmax", type=int, default=1000, help="largest scale N in the chain")
    p.add_argument("--j-range", type=int, default=None, help="default 10 * max(nk)")
    p.set_defaults(run=run_refute)
    leaves.append(p)

    p = sub.add_parser("moebius", parents=[common], help="linear fractional maps", epilog=PRECEDENCE_NOTE)
    msub = p.add_subparsers(dest="action", metavar="ACTION")
    for name in ("classify", "iterate", "identity-check"):
        q = msub.add_parser(name, parents=[common], epilog=PRECEDENCE_NOTE)
        q.add_argument("--coeffs", nargs=4, metavar=("A", "B", "C", "D"))
        q.add_argument("--symbol")
        q.add_argument("--n", type=int, default=1)
        q.add_argument("--z", default="0")
        q.add_argument("--a", default="1")
        q.add_argument("--random", type=int, default=0, metavar="K")
        q.set_defaults(run=run_moebius)
        leaves.append(q)

    p = sub.add_parser("hardy", parents=[common], help="H^2 composition operator checks",
                       epilog=PRECEDENCE_NOTE)
    hsub = p.add_subparsers(dest="action", metavar="ACTION")
    for name in ("decay", "estimate", "obstruct", "cluster"):
        q = hsub.add_parser(name, parents=[common], epilog=PRECEDENCE_NOTE)
        q.add_argument("--f", default="identity", help="'identity', polynomial in z, or coefficient JSON")
        q.add_argument("--a", default="1")
        q.add_argument("--z", default="0.5")
        q.add_argument("--w", default="0")
        q.add_argument("--nmax", type=int, default=1000)
        q.add_argument("--coeffs", nargs=4, metavar=("A", "B", "C", "D"))
        q.add_argument("--symbol")
        q.add_argument("--p", default=None, help="interior fixed point (obstruct)")
        q.add_argument("--N", type=int, default=1000)
        q.add_argument("--grid", nargs="+", default=["0", "0.5", "-0.5j"])
        q.add_argument("--n", type=int, default=4096)
        q.add_argument("--random", type=int, default=0, metavar="K")
        q.add_argument("--degree", type=int, default=64)
        q.set_defaults(run=run_hardy)
        leaves.append(q)
    return parser, leaves


def _load_config(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return {}
    with open(known.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise InputError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in cfg.items()}


# output ---------------------------------------------------------------------


def _series_of(result) -> dict:
    data = result.to_dict()
    if isinstance(result, crit.CriterionReport):
        merged = dict(data["cond3"]["series"])
        merged.update({k: v for k, v in data["cond2"]["series"].items() if k != "n"})
        return merged
    if isinstance(result, shift.RefutationCertificate):
        return data["profile"]
    return data.get("series", {})


def render(result, fmt: str) -> str:
    if fmt == "json":
        return dumps(result.to_dict())
    series = _series_of(result)
    if "n" not in series:
        raise InputError(f"{result.to_dict()['check']} has no tabular output; use --format json")
    cols = ["n"] + [k for k in series if k != "n"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for row in zip(*(series[c] for c in cols)):
        writer.writerow([json.dumps(v) if isinstance(v, list) else repr(v) if isinstance(v, float) else v
                         for v in row])
    return buf.getvalue()


def exit_status(result) -> int:
    return EXIT_OK if result.verdict.definitive else EXIT_UNDETERMINED


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, leaves = build_parser()
        cfg = _load_config(argv)
        if cfg:
            for leaf in leaves:
                leaf.set_defaults(**cfg)
        args = parser.parse_args(argv)
        if not hasattr(args, "run"):
            parser.print_help(sys.stderr)
            return EXIT_INPUT
        if args.threads < 1:
            raise InputError("--threads must be >= 1")
        result = args.run(args)
        text = render(result, args.format)
    except (HyperlabError, OSError, json.JSONDecodeError) as exc:
        print(f"hyperlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return exit_status(result)


if __name__ == "__main__":
    sys.exit(main())
