"""twistlab command-line interface."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .config import ConfigError, ExperimentConfig, load_config
from .reports import MomentReport

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 1, 2


def g12(x) -> str:
    return f"{float(x):.12g}"


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI experiment file")
    p.add_argument("--class", dest="classes", help='twist classes "k,a;k,a" or "all"')
    p.add_argument("--X", type=float)
    p.add_argument("--workers", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--prime-only", action="store_true", default=None)
    p.add_argument("--output", "--out", dest="output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistlab", description="Quadratic twist L-value experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="Frobenius traces A(p) or coefficients A(n)")
    _common(p)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--pmax", type=int, help="list A(p) for primes up to this bound")
    p.add_argument("--primes", action="store_true", help="list A(p) for primes only")

    p = sub.add_parser("enumerate", help="fundamental discriminants in twist classes")
    _common(p)
    p.add_argument("--count", action="store_true", help="print per-class counts only")

    p = sub.add_parser("lvalues", help="central values over the smooth window of each class")
    _common(p)

    p = sub.add_parser("moments", help="moment sum against its main-term oracle (JSON)")
    _common(p)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--u", type=int, default=1)
    p.add_argument("--v", type=int, default=1)
    p.add_argument("--n", type=int, default=1, help="argument of chi_d for --stat charsum")
    p.add_argument("--stat", choices=["auto", "first", "charsum", "pd", "pc"], default="auto")

    p = sub.add_parser("dist", help="tail frequencies of normalised log L (CSV)")
    _common(p)
    p.add_argument("--adjust", action="store_true")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("verify", help="run an invariant suite")
    _common(p)
    p.add_argument("suite", choices=["gauss", "poisson", "key-inequality", "lemma1", "afe", "charsum"])
    p.add_argument("--trials", type=int)
    p.add_argument("--nmax", type=int, default=3000, help="gauss: largest odd modulus")
    p.add_argument("--kmax", type=int, default=60, help="gauss: largest |k|")
    return ap


def resolve_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(classes=args.classes, X=args.X, workers=args.workers, seed=args.seed,
                              eps=args.eps, prime_only=args.prime_only, output=args.output)


def cmd_coeffs(cfg, args) -> int:
    from .coefficients import coefficient_table
    from .frobenius import prime_traces

    curve = cfg.curve()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if args.primes or args.pmax:
        primes, traces = prime_traces(curve, max(args.pmax or args.n_max, 2))
        w.writerow(["p", "A_p"])
        w.writerows(zip(primes.tolist(), traces.tolist()))
    else:
        tab = coefficient_table(curve, max(args.n_max, 2))
        w.writerow(["n", "A_n"])
        w.writerows((n, int(tab[n])) for n in range(1, args.n_max + 1))
    _emit(buf.getvalue(), cfg.output)
    return EXIT_OK


def cmd_enumerate(cfg, args) -> int:
    from .discriminants import enumerate_class

    buf = io.StringIO()
    for cls in cfg.twist_classes():
        ds = enumerate_class(cls, int(cfg.X), cfg.prime_only).to_array()
        if args.count:
            buf.write(f"{cls.label()}\t{ds.size}\n")
        else:
            buf.writelines(f"{d}\n" for d in ds.tolist())
    _emit(buf.getvalue(), cfg.output)
    return EXIT_OK


def cmd_lvalues(cfg, args) -> int:
    from .lvalues import batch_central_values

    if cfg.X < 10:
        raise ConfigError("X must be at least 10")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["d", "L_half", "phi_weight", "n_max_used"])
    for cls in cfg.twist_classes():
        vals = batch_central_values(cls, cfg.X, eps=cfg.eps, prime_only=cfg.prime_only, workers=cfg.workers)
        for d, L, wt, nm in zip(vals.d.tolist(), vals.L.tolist(), vals.weight.tolist(), vals.n_max.tolist()):
            w.writerow([d, g12(L), g12(wt), nm])
    _emit(buf.getvalue(), cfg.output)
    return EXIT_OK


def _combine(label: str, reports: list[MomentReport]) -> MomentReport:
    if len(reports) == 1:
        return reports[0]
    emp = sum(r.empirical for r in reports)
    orc = sum(r.oracle for r in reports)
    extra = {"classes": [r.extra.get("class") for r in reports],
             "per_class": [{"empirical": r.empirical, "oracle": r.oracle} for r in reports]}
    return MomentReport(label, reports[0].X, reports[0].k, emp, orc,
                        None if orc else abs(emp), sum(r.runtime_s for r in reports), extra)


def cmd_moments(cfg, args) -> int:
    from . import moments as M

    stat = args.stat
    if stat == "auto":
        stat = "first" if args.k == 1 else "pd"
    try:
        if stat == "first":
            reps = [M.first_moment(c, args.u, args.v, cfg.X, eps=cfg.eps, workers=cfg.workers)
                    for c in cfg.twist_classes()]
        elif stat == "charsum":
            reps = [M.charsum_average(c, args.n, args.v, cfg.X) for c in cfg.twist_classes()]
        elif stat == "pd":
            reps = [M.pd_moments(c, args.k, cfg.X, args.v) for c in cfg.twist_classes()]
        else:
            reps = [M.pc_moments(c, args.k, cfg.X) for c in cfg.twist_classes()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rep = _combine(reps[0].label, reps)
    _emit(rep.to_json(include_runtime=False) + "\n", cfg.output)
    return EXIT_OK


def cmd_dist(cfg, args) -> int:
    from .moments import logL_distribution

    if cfg.X < 100:
        raise ConfigError("X must be at least 100")
    rep = logL_distribution(cfg.curve(), cfg.X, adjust=args.adjust, prime_only=cfg.prime_only,
                            eps=cfg.eps, workers=cfg.workers)
    _emit(rep.to_json() + "\n" if args.json else rep.to_csv(), cfg.output)
    return EXIT_OK


def cmd_verify(cfg, args) -> int:
    from . import verify as V

    curve = cfg.curve()
    suite = args.suite
    if suite in ("lemma1", "key-inequality"):
        n, bad = V.SUITES[suite](trials=args.trials or 10_000, seed=cfg.seed)
    elif suite == "poisson":
        n, bad = V.verify_poisson(cases=args.trials or 100, seed=cfg.seed)
    elif suite == "gauss":
        n, bad = V.verify_gauss(n_max=args.nmax, k_max=args.kmax)
    elif suite == "afe":
        n, bad = V.verify_afe(curve, samples=args.trials or 100, seed=cfg.seed,
                              cls=cfg.twist_classes()[0], eps=cfg.eps)
    else:
        X = cfg.X if args.X is not None else 1e6
        n, bad = V.verify_charsum(curve, X, cls=cfg.twist_classes()[0])
    summary = {"suite": suite, "cases": n, "violations": len(bad), "first_violations": bad[:10]}
    _emit(json.dumps(summary, indent=2) + "\n", cfg.output)
    if bad:
        for line in bad[:10]:
            print(f"violation: {line}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


COMMANDS = {"coeffs": cmd_coeffs, "enumerate": cmd_enumerate, "lvalues": cmd_lvalues,
            "moments": cmd_moments, "dist": cmd_dist, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
