"""Command-line surface: one binary with subcommands wrapping the library
into reproducible batch workflows.

Exit codes: 0 pass, 1 check failure, 2 usage error, 3 budget exceeded.
All non-MC output is exact-rational and byte-deterministic (sorted JSON
keys); MC output carries means, stderrs, and band verdicts.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import ensembles, melonic, transforms
from .errors import BudgetExceededError, MissingEntryError
from .invariants import InvariantClass, PermTuple, enumerate_classes
from .perms import Perm


def _emit(data) -> None:
    print(json.dumps(data, sort_keys=True, indent=1))


def _fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _parse_class(text: str) -> InvariantClass:
    return InvariantClass.from_text(text)


def cmd_enumerate(args) -> int:
    classes = enumerate_classes(args.n, args.D, args.flavor, connected_only=args.connected)
    rows = []
    for cls in classes:
        s = cls.representative
        if args.flavor == "pure":
            is_first = melonic.is_melonic(s) and s.K_p == 1
            order = melonic.order_of_dominance(s, "pure-gaussian")
        else:
            ext = s.extend(Perm.identity(s.n))
            is_first = melonic.is_melonic(ext) and s.K_m == 1
            order = melonic.order_of_dominance(s, "wishart-mixed")
        if args.melonic_only and not melonic.is_melonic(s):
            continue
        rows.append(
            {
                "class": cls.text(),
                "K_m": s.K_m,
                "K_p": s.K_p,
                "degree": melonic.degree(s),
                "order": order,
                "first_order": is_first,
            }
        )
    if args.format == "csv":
        print("class,K_m,K_p,degree,order,first_order")
        for r in rows:
            print(
                f"\"{r['class']}\",{r['K_m']},{r['K_p']},{r['degree']},"
                f"{r['order']},{int(r['first_order'])}"
            )
    elif args.latex:
        print(r"\begin{tabular}{lrrrr}")
        print(r"class & $K_m$ & $K_p$ & degree & order \\")
        for r in rows:
            print(
                rf"\verb|{r['class']}| & {r['K_m']} & {r['K_p']} & "
                rf"{r['degree']} & {r['order']} \\"
            )
        print(r"\end{tabular}")
    else:
        _emit({"count": len(rows), "classes": rows})
    return 0


def cmd_gaussian(args) -> int:
    cls = _parse_class(args.cls)
    s = cls.representative
    C = Fraction(args.covariance)
    out = {"class": cls.text()}
    if args.cumulant:
        comps = [
            s.restrict_pure(w, b) for w, b in s.components_pure().blocks
        ]
        poly = ensembles.gaussian_cumulant_exact(comps, C)
        out["cumulant"] = poly.to_json()
        out["pretty"] = str(poly)
    else:
        poly = ensembles.gaussian_moment_exact(s, C)
        out["moment"] = poly.to_json()
        out["pretty"] = str(poly)
    report = ensembles.gaussian_scaling(s)
    out["scaling_exponent"] = report.exponent
    out["asymptotic_moment"] = report.phi
    _emit(out)
    return 0


def cmd_wishart(args) -> int:
    if args.cls:
        cls = _parse_class(args.cls)
        s = cls.representative
        report = ensembles.wishart_scaling(s)
        _emit(
            {
                "class": cls.text(),
                "scaling_exponent": report.exponent,
                "asymptotic_moment": report.phi,
                "minimizers": [str(p) for p in report.minimizer_pairings],
            }
        )
        return 0
    t = Fraction(args.t)
    poly = ensembles.wishart_matrix_moment(args.n, t)
    _emit(
        {
            "n": args.n,
            "t": _fraction_str(t),
            "moment": poly.to_json(),
            "pretty": str(poly),
            "asymptotic": _fraction_str(ensembles.wishart_matrix_moment_asymptotic(args.n, t)),
        }
    )
    return 0


def cmd_gram(args) -> int:
    from .invariants import gram_leading

    classes = enumerate_classes(args.n, args.D, args.flavor)
    matrix = []
    for a in classes:
        row = []
        for b in classes:
            exp, coeff = gram_leading(a, b)
            row.append({"exponent": exp, "coefficient": coeff})
        matrix.append(row)
    if args.latex:
        print(r"\begin{tabular}{l" + "r" * len(classes) + "}")
        for a, row in zip(classes, matrix):
            cells = [f"{c['coefficient']}N^{{{c['exponent']}}}" for c in row]
            print(rf"\verb|{a.text()}| & " + " & ".join(cells) + r" \\")
        print(r"\end{tabular}")
    else:
        _emit(
            {
                "classes": [c.text() for c in classes],
                "leading": matrix,
            }
        )
    return 0


def cmd_transform(args) -> int:
    with open(args.table) as fh:
        table = transforms.MomentTable.from_json(fh.read())
    out = transforms.CumulantTable(table.flavor, table.regime, table.multilabel)
    classes = []
    for key in table.entries:
        class_key = key[0] if table.multilabel else key
        classes.append(class_key)

    def rep_of(class_key):
        return PermTuple([Perm(im) for im in class_key[1]])

    forward = args.direction == "moments-to-cumulants"
    if args.regime == "finite":
        fc = (
            transforms.finite_cumulant_mixed
            if table.flavor == "mixed"
            else transforms.finite_cumulant_pure
        )
        op = fc if forward else transforms.finite_moment_from_cumulants
    elif args.regime == "asymptotic-melonic":
        op = (
            transforms.asymptotic_cumulant_melonic
            if forward
            else transforms.asymptotic_moment_from_cumulants_melonic
        )
    elif args.regime == "asymptotic-wishart":
        op = (
            transforms.asymptotic_cumulant_wishart_mixed
            if forward
            else transforms.asymptotic_moment_from_cumulants_wishart
        )
    else:
        raise ValueError(f"unknown regime {args.regime}")

    for key in sorted(table.entries, key=repr):
        if table.multilabel:
            class_key, word = key
        else:
            class_key, word = key, None
        s = rep_of(class_key)
        try:
            if word is not None:
                value = op(table, s, word=word)
            else:
                value = op(table, s)
        except (ValueError, MissingEntryError) as exc:
            if args.skip_unsupported:
                continue
            print(f"transform failed on {class_key}: {exc}", file=sys.stderr)
            return 1
        out.set(s, value, word=word)
    blob = out.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(blob)
    else:
        print(blob)

    if args.check:
        inverse = (
            "cumulants-to-moments" if forward else "moments-to-cumulants"
        )
        back_op = None
        if args.regime == "finite":
            back_op = (
                transforms.finite_moment_from_cumulants
                if forward
                else (
                    transforms.finite_cumulant_mixed
                    if table.flavor == "mixed"
                    else transforms.finite_cumulant_pure
                )
            )
        elif args.regime == "asymptotic-melonic":
            back_op = (
                transforms.asymptotic_moment_from_cumulants_melonic
                if forward
                else transforms.asymptotic_cumulant_melonic
            )
        else:
            back_op = (
                transforms.asymptotic_moment_from_cumulants_wishart
                if forward
                else transforms.asymptotic_cumulant_wishart_mixed
            )
        from .weingarten import as_ratfun

        for key in out.entries:
            class_key, word = (key if table.multilabel else (key, None))
            s = rep_of(class_key)
            try:
                if word is not None:
                    back = back_op(out, s, word=word)
                else:
                    back = back_op(out, s)
            except (ValueError, MissingEntryError):
                continue
            original = table.entries[key]
            same = (
                as_ratfun(back) == as_ratfun(original)
                if args.regime == "finite"
                else back == original
            )
            if not same:
                print(f"round trip failed on {class_key}", file=sys.stderr)
                return 1
        print("round trip ok", file=sys.stderr)
    return 0


def cmd_fixed_point(args) -> int:
    couplings = {}
    for spec in args.coupling:
        name, z, ntau = spec.split(":")
        couplings[name] = (Fraction(z), int(ntau))
    series = ensembles.melonic_fixed_point(couplings, args.order)
    terms = [
        {"exponents": list(e), "coefficient": _fraction_str(c)}
        for e, c in sorted(series.terms.items())
    ]
    _emit({"names": list(series.names), "order": args.order, "terms": terms})
    return 0


def cmd_freeness_check(args) -> int:
    if args.demo == "gaussian-pair":
        table = ensembles.gaussian_multilabel_phi_table(args.n_max, args.D)
    elif args.demo == "wishart-pair":
        table = ensembles.wishart_multilabel_phi_table(args.n_max, args.D)
    elif args.table:
        with open(args.table) as fh:
            table = transforms.MomentTable.from_json(fh.read())
    else:
        print("need --demo or --table", file=sys.stderr)
        return 2
    from .paired import freeness_check

    report = freeness_check(table, args.n_max)
    print(report.summary(), file=sys.stderr)
    _emit(
        {
            "flavor": report.flavor,
            "verdicts": list(report.verdicts()),
            "all_agree": report.all_agree,
            "free": report.free,
            "checks": {f.name: f.checked for f in report.formulations},
        }
    )
    return 0 if (report.free and report.all_agree) else 1


def cmd_mc_verify(args) -> int:
    from . import mc

    class_list = None
    if args.config:
        conf = mc.load_run_config(args.config)
        for key in ("N", "D", "samples", "seed", "n_max", "sigmas", "threads"):
            if key in conf:
                setattr(args, key, conf[key])
        if "classes" in conf:
            with open(conf["classes"]) as fh:
                class_list = [
                    _parse_class(line.strip()) for line in fh if line.strip()
                ]
    cfg = mc.EnsembleConfig("ginibre", args.N, args.D, seed=args.seed)
    if class_list is None:
        class_list = [
            cls
            for n in range(1, args.n_max + 1)
            for cls in enumerate_classes(n, args.D, "pure")
        ]
    failures = 0
    results = []
    for cls in class_list:
        s = cls.representative
        exact = float(ensembles.gaussian_moment_exact(s)(args.N))
        est = mc.estimate_moment(s, "pure", cfg, args.samples, threads=args.threads)
        ok = est.within(exact, sigmas=args.sigmas)
        failures += 0 if ok else 1
        results.append(
            {
                "class": cls.text(),
                "exact": exact,
                "mean": [est.mean.real, est.mean.imag],
                "stderr": est.stderr,
                "ok": ok,
            }
        )
    residual = mc.lu_invariance_residual(
        PermTuple([Perm.from_text("(1 2)", n=2)] + [Perm.identity(2)] * (args.D - 1)),
        "pure",
        min(args.N, 6),
        seed=args.seed,
    )
    _emit(
        {
            "N": args.N,
            "D": args.D,
            "samples": args.samples,
            "results": results,
            "lu_residual": residual,
            "failures": failures,
        }
    )
    return 0 if failures == 0 and residual < 1e-9 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tensorfree",
        description="Exact combinatorics of local-unitary-invariant random tensors.",
    )
    parser.add_argument("--threads", type=int, default=None, help="worker threads for MC paths")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list invariant classes with their structure data")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--flavor", choices=("mixed", "pure"), required=True)
    p.add_argument("--connected", action="store_true")
    p.add_argument("--melonic-only", action="store_true")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("gaussian", help="exact Gaussian moment/cumulant of a class")
    p.add_argument("--cls", required=True, help='class text, e.g. "flavor=pure;D=3;n=2;c1=(1 2);c2=(1)(2);c3=(1)(2)"')
    p.add_argument("--covariance", default="1")
    p.add_argument("--cumulant", action="store_true")
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("wishart", help="Wishart matrix moments or tensor scaling")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--t", default="1")
    p.add_argument("--cls", default=None)
    p.set_defaults(func=cmd_wishart)

    p = sub.add_parser("gram", help="leading Gram matrix between classes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--flavor", choices=("mixed", "pure"), default="mixed")
    p.add_argument("--latex", action="store_true")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("transform", help="moment <-> cumulant table transforms")
    p.add_argument("--table", required=True)
    p.add_argument(
        "--direction",
        choices=("moments-to-cumulants", "cumulants-to-moments"),
        required=True,
    )
    p.add_argument(
        "--regime",
        choices=("finite", "asymptotic-melonic", "asymptotic-wishart"),
        required=True,
    )
    p.add_argument("--check", action="store_true", help="verify the round trip")
    p.add_argument("--skip-unsupported", action="store_true")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("fixed-point", help="melonic covariance fixed point as a formal series")
    p.add_argument("--coupling", action="append", default=[], help="name:z:ntau")
    p.add_argument("--order", type=int, default=4)
    p.set_defaults(func=cmd_fixed_point)

    p = sub.add_parser("freeness-check", help="three-way tensor-freeness report")
    p.add_argument("--demo", choices=("gaussian-pair", "wishart-pair"), default=None)
    p.add_argument("--table", default=None)
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--D", type=int, default=3)
    p.set_defaults(func=cmd_freeness_check)

    p = sub.add_parser("mc-verify", help="Monte Carlo bands against exact polynomials")
    p.add_argument("--config", default=None, help="key=value run file overriding the flags")
    p.add_argument("--N", type=int, default=6)
    p.add_argument("--D", type=int, default=3)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", dest="n_max", type=int, default=2)
    p.add_argument("--sigmas", type=float, default=3.0)
    p.set_defaults(func=cmd_mc_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        import os

        args.threads = os.cpu_count()
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
