"""Command-line front end.

Exit codes: 0 certified (or success), 1 hypothesis fails, 2 not applicable,
3 input or parameter error, 4 search budget exceeded, 5 generation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from . import __version__
from . import criteria as crit
from . import generators as gen
from . import matroid, oracle
from .errors import (
    BudgetExceeded,
    FamilyFormatError,
    GenerationFailure,
    KruskalCertError,
    ParameterError,
)
from .field import GF, Field
from .fixtures import fixture_catalog, get_fixture, identity_family, identity_symmetric
from .io import (
    atomic_write,
    certificate_document,
    dump_family,
    json_default,
    load_certificate,
    parse_family,
    sha256_text,
)
from .tensor import (
    DimTable,
    ProductFamily,
    SymmetricFamily,
    family_sum,
    flattening_ranks,
    k_rank_profile,
    symmetric_lift,
)

__all__ = ["main", "build_parser", "EXIT", "exit_code_for"]

EXIT = {
    "certified": 0,
    "hypothesis_fails": 1,
    "not_applicable": 2,
    "input_error": 3,
    "budget": 4,
    "generation": 5,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, BudgetExceeded):
        return EXIT["budget"]
    if isinstance(exc, GenerationFailure):
        return EXIT["generation"]
    return EXIT["input_error"]


# ---------------------------------------------------------------- helpers


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _over(F, p: Optional[int]):
    """Reinterpret a family over GF(p) when --p is given."""
    if p is None:
        return F
    field = GF(p)
    if isinstance(F, SymmetricFamily):
        return SymmetricFamily(field, F.base_vectors, F.coeffs, F.m, F.name)
    return F.over(field)


def _product(F) -> ProductFamily:
    return symmetric_lift(F) if isinstance(F, SymmetricFamily) else F


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        atomic_write(out, text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, default=json_default)


def _family_paths(path: str) -> List[str]:
    if os.path.isdir(path):
        return sorted(os.path.join(path, f) for f in os.listdir(path) if f.endswith(".json"))
    return [path]


def _read(path: str) -> Tuple[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FamilyFormatError(f"cannot read file: {exc.strerror}", path) from None
    return text, parse_family(text, path)


def _budget(args) -> oracle.SearchBudget:
    return oracle.SearchBudget(max_candidates=args.budget, time_limit=args.time_limit)


# ---------------------------------------------------------------- check


def _check_params(args) -> Dict[str, Any]:
    params: Dict[str, Any] = {}
    for key in ("q", "s", "r", "limit"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.pivot is not None:
        if args.criterion not in ("condition-h", "condition-c"):
            raise ParameterError("--pivot applies to condition-h and condition-c only")
        params["pivot_mode"] = args.pivot
    if args.criterion == "dls-side":
        if args.which is None:
            raise ParameterError("dls-side needs --which")
        params["which"] = args.which
        if args.subset is not None:
            params["subset"] = args.subset
        if args.exhaustive:
            params["exhaustive"] = True
    elif args.which is not None or args.subset is not None:
        raise ParameterError("--which/--subset apply to dls-side only")
    return params


def _run_check(args, path: str) -> Tuple[int, str]:
    text, F = _read(path)
    F = _over(F, args.p)
    params = _check_params(args)
    cert = crit.CRITERIA[args.criterion](F, **params)
    doc = certificate_document(cert, text, path, params)
    return EXIT[cert.status.value], _dumps(doc)


def cmd_check(args) -> int:
    paths = _family_paths(args.family)
    if len(paths) == 1 and not os.path.isdir(args.family):
        code, out = _run_check(args, paths[0])
        _emit(out, args.out)
        return code
    # batch: one certificate per family file
    worst = 0
    for path in paths:
        try:
            code, out = _run_check(args, path)
        except KruskalCertError as exc:
            code, out = exit_code_for(exc), ""
            print(f"{path}: error: {exc}", file=sys.stderr)
        if out:
            if args.out:
                base = os.path.splitext(os.path.basename(path))[0]
                atomic_write(os.path.join(args.out, f"{base}.{args.criterion}.cert.json"), out + "\n")
            status = json.loads(out)["status"]
            print(f"{path}: {status}")
        worst = max(worst, code)
    return worst


# ---------------------------------------------------------------- bounds and structure


def cmd_bounds(args) -> int:
    _, F = _read(args.family)
    F = _over(F, args.p)
    P = _product(F)
    methods = args.methods or (["subset", "mu", "flattening"] + (["waring"] if isinstance(F, SymmetricFamily) else []))
    rows = []
    for meth in methods:
        if meth == "subset":
            res = crit.tensor_rank_lb_subset(P, limit=args.limit)
        elif meth == "mu":
            res = crit.tensor_rank_lb_mu(P)
        elif meth == "flattening":
            res = crit.tensor_rank_lb_flattening(P)
        elif meth == "waring":
            if not isinstance(F, SymmetricFamily):
                raise ParameterError("the waring bound needs a symmetric family")
            res = crit.waring_rank_lb(F)
        else:
            raise ParameterError(f"unknown bound method {meth!r}")
        rows.append(res.to_json())
    best = max((r["lower_bound"] for r in rows if r["lower_bound"] is not None), default=None)
    report = {"family": args.family, "bounds": rows, "max": best}
    if args.json:
        _emit(_dumps(report), args.out)
    else:
        lines = [f"{r['method']:<12} {r['lower_bound'] if r['applicable'] else 'n/a'}" for r in rows]
        lines.append(f"{'max':<12} {best}")
        _emit("\n".join(lines), args.out)
    return 0


def _structure(args, build: Callable[[ProductFamily], Dict[str, Any]], render: Callable[[Dict[str, Any]], str]) -> int:
    _, F = _read(args.family)
    F = _product(_over(F, args.p))
    report = build(F)
    _emit(_dumps(report) if args.json else render(report), args.out)
    return 0


def cmd_split(args) -> int:
    def build(F):
        sep = matroid.separator_search(F.assembled_list())
        return {"splits": sep is not None, "separator": list(sep.S) if sep else None,
                "complement": list(sep.complement) if sep else None}

    return _structure(args, build, lambda r: f"separator {r['separator']} | {r['complement']}" if r["splits"]
                      else "connected (no separator)")


def cmd_components(args) -> int:
    def build(F):
        part = matroid.family_components(F)
        return {"blocks": [list(b) for b in part.blocks], "connected": part.connected}

    return _structure(args, build, lambda r: "\n".join(" ".join(map(str, b)) for b in r["blocks"]))


def cmd_ears(args) -> int:
    def build(F):
        ears = matroid.ear_decomposition(F.assembled_list())
        return {"ears": [list(c) for c in ears.circuits]}

    return _structure(args, build, lambda r: "\n".join(" ".join(map(str, c)) for c in r["ears"]))


def cmd_kranks(args) -> int:
    def build(F):
        return {"k": list(k_rank_profile(F).per_mode)}

    return _structure(args, build, lambda r: " ".join(map(str, r["k"])))


def cmd_dims(args) -> int:
    def build(F):
        table = DimTable(F)
        rep: Dict[str, Any] = {"d": list(table.full_dims()),
                               "flattening": list(flattening_ranks(family_sum(F), F.mode_dims, F.field))}
        if args.subsets:
            from .subsets import iter_subsets

            rep["subsets"] = [{"subset": list(S), "dims": list(table.mode_dims(S))}
                              for S in iter_subsets(F.n, 1, F.n, args.limit)]
        return rep

    def render(r):
        lines = ["d " + " ".join(map(str, r["d"])), "flattening " + " ".join(map(str, r["flattening"]))]
        for row in r.get("subsets", []):
            lines.append(f"{row['subset']} {' '.join(map(str, row['dims']))}")
        return "\n".join(lines)

    return _structure(args, build, render)


# ---------------------------------------------------------------- oracle


def _prime_family(args, path: str) -> ProductFamily:
    _, F = _read(path)
    F = _over(F, args.p)
    if F.field.p is None:
        raise ParameterError("oracle commands need a prime field; pass --p")
    return F


def cmd_oracle(args) -> int:
    budget = _budget(args)
    F = _prime_family(args, args.family)
    P = _product(F)
    report: Dict[str, Any] = {"command": args.oracle_command, "field": str(P.field)}
    code = 0
    if args.oracle_command == "rank":
        report["rank"] = oracle.brute_force_rank(family_sum(P), P.mode_dims, P.field, budget)
        text = str(report["rank"])
    elif args.oracle_command == "decomps":
        if args.r is None:
            raise ParameterError("decomps needs --r")
        ds = oracle.all_decompositions(family_sum(P), P.mode_dims, args.r, P.field, budget)
        report.update({"r": args.r, "count": len(ds), "consumed": ds.consumed,
                       "decompositions": [json.loads(json.dumps(_terms(s), default=json_default))
                                          for s in ds.solutions]})
        text = f"{len(ds)} decompositions with at most {args.r} terms"
    elif args.oracle_command == "unique":
        if isinstance(F, SymmetricFamily):
            if args.rmax is None:
                raise ParameterError("symmetric uniqueness needs --rmax")
            rep = oracle.symmetric_uniqueness_bruteforce(F, args.rmax, budget)
        else:
            rep = oracle.uniqueness_bruteforce(P, args.rmax, budget)
        report.update({"unique": rep.unique, "rank": rep.rank, "r_max": rep.r_max, "consumed": rep.consumed,
                       "counterexample": _terms(rep.counterexample) if rep.counterexample else None})
        text = "unique" if rep.unique else "not unique"
        code = 0 if rep.unique else 1
    elif args.oracle_command == "condition-u":
        rep = oracle.condition_U_bruteforce(P, args.pivot or 0, budget=budget)
        report.update({"holds": rep.holds, "violating_alpha": rep.violating_alpha, "reason": rep.reason,
                       "checked": rep.checked})
        text = "holds" if rep.holds else f"fails {rep.reason} {rep.violating_alpha or ''}".strip()
        code = 0 if rep.holds else 1
    elif args.oracle_command == "subpartition":
        if args.other is None or args.s is None or args.l is None:
            raise ParameterError("subpartition needs a second family file, --s and --l")
        G = _product(_prime_family(args, args.other))
        wit = oracle.subpartition_verify(P, G, args.s, args.l)
        report.update({"found": wit is not None,
                       "pairs": [[list(q), list(r)] for q, r in wit.pairs] if wit else None})
        text = f"witness {report['pairs']}" if wit else "no witness"
        code = 0 if wit else 1
    else:  # pragma: no cover - argparse restricts choices
        raise ParameterError(f"unknown oracle command {args.oracle_command}")
    _emit(_dumps(report) if args.json else text, args.out)
    return code


def _terms(F: ProductFamily) -> List[Dict[str, Any]]:
    return [{"factors": [list(f) for f in t.factors], "coeff": t.coeff} for t in F.tensors]


# ---------------------------------------------------------------- generate


def _field_arg(args) -> Field:
    return GF(args.p) if args.p is not None else gen.DEFAULT_FIELD


def _write_pair(inst: gen.SharpnessInstance, args, stem: str) -> None:
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        meta = {"params": inst.params, "relation": inst.relation}
        atomic_write(os.path.join(args.out, f"{stem}_E.json"), dump_family(inst.E, f"{stem}_E", meta))
        atomic_write(os.path.join(args.out, f"{stem}_F.json"), dump_family(inst.F, f"{stem}_F", meta))
        print(f"wrote {stem}_E.json and {stem}_F.json to {args.out}")
    else:
        from .io import family_to_json

        doc = {"params": inst.params, "relation": inst.relation, "verified": inst.verify(),
               "E": family_to_json(inst.E, f"{stem}_E"), "F": family_to_json(inst.F, f"{stem}_F")}
        sys.stdout.write(_dumps(doc) + "\n")


def cmd_generate(args) -> int:
    rng = random.Random(args.seed)
    kind = args.generate_command
    if kind == "circuit":
        spec = gen.CircuitSpec(tuple(args.dims), symmetric=args.symmetric)
        C = gen.find_circuit(spec, _field_arg(args), args.attempts, rng, strategy=args.strategy)
        if C is None:
            raise GenerationFailure(f"no circuit for dims {tuple(args.dims)} after {args.attempts} attempts",
                                    args.attempts)
        extra = {"circuit": {"n": C.n, "dims": list(spec.target_dims), "verified": True}}
        _emit(dump_family(C, "circuit", extra), args.out)
    elif kind == "sharp-tensor":
        inst = gen.build_sharpness_tensor_instance(args.k, args.d, args.i, args.n, _field_arg(args), rng,
                                                   attempts=args.attempts)
        _write_pair(inst, args, "sharp_tensor")
    elif kind == "sharp-symmetric":
        inst = gen.build_sharpness_symmetric_instance(args.m, args.d, args.n, args.r, _field_arg(args), rng,
                                                      k=args.k, attempts=args.attempts)
        _write_pair(inst, args, "sharp_symmetric")
    elif kind == "fixture":
        field = GF(args.p) if args.p is not None else None
        if args.name == "all":
            if not args.out:
                raise ParameterError("fixture all needs --out DIR")
            from .fixtures import write_fixtures

            for path in write_fixtures(args.out):
                print(path)
            return 0
        if args.name in ("identity", "identity-symmetric"):
            if args.n is None:
                raise ParameterError(f"{args.name} needs --n")
            m = args.m or 3
            kw = {"field": field} if field else {}
            F = identity_family(args.n, m, **kw) if args.name == "identity" else identity_symmetric(args.n, m, **kw)
            _emit(dump_family(F), args.out)
        else:
            try:
                fx = get_fixture(args.name)
            except KeyError:
                names = ", ".join(f.name for f in fixture_catalog())
                raise ParameterError(f"unknown fixture {args.name!r}; known: identity, identity-symmetric, "
                                     f"all, {names}") from None
            F = _over(fx.family, args.p)
            _emit(dump_family(F, fx.name, {"expected": fx.expected}), args.out)
    return 0


# ---------------------------------------------------------------- revalidate


def cmd_revalidate(args) -> int:
    try:
        with open(args.certificate, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FamilyFormatError(f"cannot read file: {exc.strerror}", args.certificate) from None
    cert, doc = load_certificate(text, args.certificate)
    family = None
    if args.family:
        ftext, family = _read(args.family)
        want = doc.get("input", {}).get("sha256")
        if want and want != sha256_text(ftext):
            print("warning: family file differs from the one certified", file=sys.stderr)
    ok = crit.revalidate(cert, family)
    print(f"{args.certificate}: {'valid' if ok else 'INVALID'} ({cert.criterion}: {cert.status.value})")
    return 0 if ok else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kruskal-cert", description="Exact uniqueness certificates for tensor "
                                 "decompositions, rank lower bounds and brute-force oracles.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help="write output here instead of stdout"):
        p.add_argument("--p", type=int, help="reinterpret the family over GF(p)")
        p.add_argument("--out", help=out_help)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    c = sub.add_parser("check", help="run a uniqueness criterion and emit a certificate")
    c.add_argument("criterion", choices=sorted(crit.CRITERIA))
    c.add_argument("family", help="family file, or a directory of family files")
    common(c, "certificate path (a directory in batch mode)")
    for key in ("q", "s", "r", "limit", "which"):
        c.add_argument(f"--{key}", type=int)
    c.add_argument("--pivot", type=int, help="pivot mode (0-based)")
    c.add_argument("--subset", type=_ints, help="comma-separated 0-based indices")
    c.add_argument("--exhaustive", action="store_true")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bounds", help="tensor and Waring rank lower bounds")
    b.add_argument("family")
    b.add_argument("--methods", type=lambda s: s.split(","), help="subset,mu,flattening,waring")
    b.add_argument("--limit", type=int)
    common(b)
    b.set_defaults(func=cmd_bounds)

    for name, fn, text in (
        ("split", cmd_split, "separator of the assembled tensors"),
        ("components", cmd_components, "connected components"),
        ("ears", cmd_ears, "ear decomposition of a connected family"),
        ("kranks", cmd_kranks, "per-mode k-ranks"),
        ("dims", cmd_dims, "per-mode span dimensions and flattening ranks"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("family")
        common(s)
        if name == "dims":
            s.add_argument("--subsets", action="store_true", help="dump the dim table for every subset")
            s.add_argument("--limit", type=int)
        s.set_defaults(func=fn)

    o = sub.add_parser("oracle", help="budgeted brute force over GF(p)")
    o.add_argument("oracle_command", choices=["rank", "decomps", "unique", "condition-u", "subpartition"])
    o.add_argument("family")
    o.add_argument("other", nargs="?", help="second family (subpartition)")
    common(o)
    o.add_argument("--rmax", type=int)
    o.add_argument("--r", type=int)
    o.add_argument("--s", type=int)
    o.add_argument("--l", type=int)
    o.add_argument("--pivot", type=int)
    o.add_argument("--budget", type=int, default=2_000_000, help="max enumerated candidates")
    o.add_argument("--time-limit", dest="time_limit", type=float)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("generate", help="circuits, sharpness instances and fixtures")
    gsub = g.add_subparsers(dest="generate_command", required=True)

    def gcommon(p):
        p.add_argument("--p", type=int, help="prime field (default 101)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--attempts", type=int, default=50)
        p.add_argument("--out")

    gc = gsub.add_parser("circuit")
    gc.add_argument("--dims", type=_ints, required=True)
    gc.add_argument("--symmetric", action="store_true")
    gc.add_argument("--strategy", choices=["moment", "section"], default="moment")
    gcommon(gc)
    gt = gsub.add_parser("sharp-tensor")
    gt.add_argument("--k", type=_ints, required=True)
    gt.add_argument("--d", type=_ints, required=True)
    gt.add_argument("--i", type=int, default=0)
    gt.add_argument("--n", type=int, required=True)
    gcommon(gt)
    gs = gsub.add_parser("sharp-symmetric")
    for key in ("m", "d", "n", "r"):
        gs.add_argument(f"--{key}", type=int, required=True)
    gs.add_argument("--k", type=int, help="near-sharp variant with k-rank k")
    gcommon(gs)
    gf = gsub.add_parser("fixture")
    gf.add_argument("name", help="identity, identity-symmetric, all, or a catalog name")
    gf.add_argument("--n", type=int)
    gf.add_argument("--m", type=int)
    gcommon(gf)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("revalidate", help="recheck a certificate file")
    r.add_argument("certificate")
    r.add_argument("--family", help="recompute dims and rerun the criterion on this family")
    r.set_defaults(func=cmd_revalidate)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT["input_error"] if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (KruskalCertError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(exc, BudgetExceeded) and exc.lower_bound is not None:
            print(f"lower bound established before stopping: {exc.lower_bound}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
