"""Command-line front end.

Exit codes: 0 success or "holds", 1 a definite negative answer, 2 inconclusive
(a search budget ran out), 64 usage error, 65 malformed or invalid data,
66 unreadable input file.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .amalgamation import (
    AmalgamationError,
    ExtensionError,
    ExtensionRequest,
    NoJointEmbedding,
    dist_n_witness,
    extend_one_point,
    free_amalgam,
    jep,
)
from .concentration import (
    ExtensionCaps,
    ResourceCapError,
    concentration_n,
    find_witness,
    group_closure,
    l1_power,
    levy_chain,
    random_power_coloring,
    reports_to_csv,
    weak_extension_witness,
    eppa_search,
)
from .embeddings import (
    Embedding,
    EnumerationLimitError,
    enumerate_embeddings,
    is_embedding,
    rho,
)
from .ramsey import Coloring, RamseyInstance, best_beta, random_coloring, worst_coloring
from .structures import (
    MetricStructure,
    PointedStructure,
    StructureSyntaxError,
    StructureValidationError,
    parse,
    parse_pointed,
    parse_rational,
    serialize,
    validate,
)

EXIT_OK, EXIT_NO, EXIT_INCONCLUSIVE = 0, 1, 2
EXIT_USAGE, EXIT_DATA, EXIT_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _int_list(text: str) -> list[int]:
    return [_positive_int(t) for t in text.split(",") if t]


def _mapping(text: str) -> dict[str, str]:
    """``a=x,b=y``"""
    out = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise argparse.ArgumentTypeError(f"expected label=label pairs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _rational_mapping(text: str) -> dict[str, Fraction]:
    return {k: _rational(v) for k, v in _mapping(text).items()}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read {path}: {exc.strerror}") from None


def _structure(path: str) -> MetricStructure:
    return parse(_read(path))


def _pointed(path: str) -> PointedStructure:
    return parse_pointed(_read(path))


def _embedding(src: PointedStructure, tgt: MetricStructure, mapping: dict[str, str], what: str) -> Embedding:
    S = src.structure
    if set(mapping) != set(S.points):
        raise DataError(f"{what}: mapping must cover exactly the source points {list(S.points)}")
    for v in mapping.values():
        if v not in tgt.points:
            raise DataError(f"{what}: unknown target point {v!r}")
    e = Embedding(src, tgt, tuple(mapping[p] for p in S.points))
    if not is_embedding(e):
        raise DataError(f"{what}: the map is not an embedding")
    return e


def _fmt_map(e: Embedding) -> str:
    return " ".join(f"{k}->{v}" for k, v in e.as_dict().items())


def _require_text(args, what: str):
    if args.format != "text":
        raise UsageError(f"{what} supports --format text only")


# -- subcommands -------------------------------------------------------------------

def cmd_validate(args, out):
    s = parse(_read(args.file), check=False)
    diags = validate(s)
    if not diags:
        out.write("ok\n")
        return EXIT_OK
    for d in diags:
        out.write(d + "\n")
    return EXIT_NO


def cmd_embs(args, out):
    A, B = _pointed(args.source), _structure(args.target)
    es = enumerate_embeddings(A, B, max_nodes=args.max_nodes)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(list(A.structure.points))
        for e in es:
            w.writerow(list(e.images))
    else:
        for e in es:
            out.write(_fmt_map(e) + "\n")
        out.write(f"count {len(es)}\n")
    return EXIT_OK


def cmd_rho(args, out):
    _require_text(args, "rho")
    A, B = _pointed(args.source), _structure(args.target)
    a = _embedding(A, B, args.alpha, "--alpha")
    b = _embedding(A, B, args.beta, "--beta")
    out.write(f"{rho(a, b)}\n")
    return EXIT_OK


def cmd_amalgamate(args, out):
    _require_text(args, "amalgamate")
    A = _pointed(args.base)
    B0, B1 = _structure(args.left), _structure(args.right)
    res = free_amalgam(A, B0, B1, _embedding(A, B0, args.phi0, "--phi0"),
                       _embedding(A, B1, args.phi1, "--phi1"))
    out.write(serialize(res.amalgam))
    out.write("# left " + _fmt_map(res.left_arm) + "\n")
    out.write("# right " + _fmt_map(res.right_arm) + "\n")
    return EXIT_OK


def cmd_jep(args, out):
    _require_text(args, "jep")
    res = jep(_structure(args.left), _structure(args.right), args.min_separation)
    out.write(serialize(res.amalgam))
    out.write("# left " + _fmt_map(res.left_arm) + "\n")
    out.write("# right " + _fmt_map(res.right_arm) + "\n")
    return EXIT_OK


def cmd_dist(args, out):
    _require_text(args, "dist")
    w = dist_n_witness(_pointed(args.x), _pointed(args.y))
    out.write(f"{w.value}\n")
    if args.witness:
        out.write(serialize(w.amalgam))
        out.write("# left " + _fmt_map(w.left) + "\n")
        out.write("# right " + _fmt_map(w.right) + "\n")
    return EXIT_OK


def cmd_extend(args, out):
    _require_text(args, "extend")
    req = ExtensionRequest(_structure(args.file), args.point, args.dist, args.value or {})
    out.write(serialize(extend_one_point(req)))
    return EXIT_OK


def cmd_power(args, out):
    _require_text(args, "power")
    P = l1_power(_structure(args.file), args.n, cap=args.cap)
    out.write(serialize(P.structure))
    return EXIT_OK


def _instance(args) -> RamseyInstance:
    A, B, C = _pointed(args.a), _structure(args.b), _structure(args.c)
    if args.F:
        F = [_embedding(A, B, m, "--F") for m in args.F]
    else:
        F = list(enumerate_embeddings(A, B, max_nodes=args.max_nodes))
    if not F:
        raise DataError("Emb(A, B) is empty")
    return RamseyInstance(A, B, tuple(F), args.eps, C)


def _report_status(rep) -> int:
    if rep.status == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK if rep.holds else EXIT_NO


def cmd_ramsey_check(args, out):
    inst = _instance(args)
    rep = worst_coloring(inst, args.budget, args.max_nodes)
    if rep.status == "inconclusive" and rep.upper_bound <= inst.epsilon:
        verdict, code = "yes", EXIT_OK
    elif rep.status == "inconclusive" and rep.worst_value <= inst.epsilon:
        verdict, code = "unknown", EXIT_INCONCLUSIVE
    else:
        verdict = "yes" if rep.worst_value <= inst.epsilon else "no"
        code = EXIT_OK if verdict == "yes" else EXIT_NO
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["digest", "epsilon", "holds", "status", "worst_value", "upper_bound", "nodes"])
        w.writerow([rep.digest, str(inst.epsilon), verdict, rep.status, str(rep.worst_value),
                    str(rep.upper_bound), rep.nodes_explored])
    else:
        out.write(f"holds {verdict}\n")
        out.write(rep.to_text())
    return code


def cmd_worst_coloring(args, out):
    rep = worst_coloring(_instance(args), args.budget, args.max_nodes)
    out.write(rep.to_csv() if args.format == "csv" else rep.to_text())
    return _report_status(rep)


def _read_coloring(path: str, domain) -> Coloring:
    by_images = {}
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        toks = raw.split("#", 1)[0].split()
        if not toks:
            continue
        if toks[0] == "color":
            toks = toks[1:]
        if len(toks) < 2:
            raise DataError(f"{path}:{lineno}: expected generator images followed by a value")
        try:
            by_images[tuple(toks[:-1])] = parse_rational(toks[-1])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    vals = []
    for e in domain:
        key = tuple(e.generator_images)
        if key not in by_images:
            raise DataError(f"{path}: no value for embedding {' '.join(key)}")
        vals.append(by_images[key])
    return Coloring(domain, tuple(vals))


def cmd_best_beta(args, out):
    _require_text(args, "best-beta")
    inst = _instance(args)
    domain = enumerate_embeddings(inst.A, inst.C, max_nodes=args.max_nodes)
    if args.coloring:
        gamma = _read_coloring(args.coloring, domain)
    else:
        if args.seed is None:
            raise UsageError("best-beta needs --coloring or --seed (random coloring)")
        gamma = random_coloring(domain, args.seed)
    beta, osc = best_beta(gamma, inst)
    out.write(f"oscillation {osc}\n")
    out.write(f"beta {_fmt_map(beta)}\n")
    return EXIT_OK if osc <= inst.epsilon else EXIT_NO


def cmd_conc_n(args, out):
    _require_text(args, "conc-n")
    out.write(f"{concentration_n(args.diam, args.eps, args.k)}\n")
    return EXIT_OK


def _group(args):
    B = _structure(args.carrier)
    if not args.gen:
        raise UsageError("at least one --gen is required")
    gens = []
    for m in args.gen:
        if set(m) != set(B.points):
            raise DataError("--gen must map every carrier point")
        gens.append(m)
    try:
        return group_closure(B, gens)
    except ValueError as exc:
        raise DataError(str(exc)) from None


def cmd_levy_sim(args, out):
    G = _group(args)
    reports = levy_chain(G, args.n, args.eps, args.samples, args.seed, f=args.function)
    if args.format == "csv":
        out.write(reports_to_csv(reports))
    else:
        for r in reports:
            out.write(f"group_size {r.group_size} n {r.n} epsilon {r.epsilon} samples {r.samples} "
                      f"empirical_mass {r.empirical_mass} bound {r.bound!r} seed {r.seed}\n")
    return EXIT_OK


def cmd_witness(args, out):
    G = _group(args)
    B = G.carrier
    sub = [p for p in args.sub.split(",") if p]
    if not sub or any(p not in B.points for p in sub):
        raise DataError("--sub must list carrier points")
    A = PointedStructure.full(B.induced(sub))
    n = args.n or concentration_n(G.diameter(), args.eps, len(G.generators))
    gamma = random_power_coloring(G, A, n, args.anchors, args.seed)
    res = find_witness(gamma, A, G, n, args.eps, args.budget, args.seed + 1)
    if args.format == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["group_size", "n", "epsilon", "found", "oscillation", "samples", "seed"])
        w.writerow([len(G), n, str(args.eps), int(res.found), str(res.oscillation),
                    res.samples_used, args.seed])
    else:
        out.write(f"group_size {len(G)}\nn {n}\nepsilon {args.eps}\n")
        out.write(res.to_text())
    return EXIT_OK if res.found else EXIT_INCONCLUSIVE


def _caps(args) -> ExtensionCaps:
    return ExtensionCaps(max_extra_points=args.max_extra_points, max_candidates=args.max_candidates,
                         max_denominator=args.max_denominator)


def _extension_report(res, out):
    out.write(f"found {'yes' if res.found else 'no'}\n")
    out.write(f"stats {res.stats()}\n")
    if res.found:
        out.write(serialize(res.structure))
        for partial, g in res.extensions:
            dom = ",".join(f"{k}={v}" for k, v in partial.items())
            out.write(f"# extends {dom} by {_fmt_map(g)}\n")


def cmd_eppa(args, out):
    _require_text(args, "eppa")
    res = eppa_search(_structure(args.file), _caps(args))
    _extension_report(res, out)
    return EXIT_OK if res.found else EXIT_INCONCLUSIVE


def cmd_wep(args, out):
    _require_text(args, "wep")
    A, T = _pointed(args.source), _structure(args.target)
    alphas = [_embedding(A, T, m, "--alpha") for m in args.alpha]
    res = weak_extension_witness(A, alphas, args.eps, _caps(args))
    _extension_report(res.search, out)
    if res.found:
        out.write(f"# group_order {len(res.group)}\n")
    return EXIT_OK if res.found else EXIT_INCONCLUSIVE


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("text", "csv"), default="text")
    common.add_argument("--threads", type=_positive_int, default=1,
                        help="parallelism cap (the current kernels are single-threaded)")
    common.add_argument("--max-nodes", type=_positive_int, default=None,
                        help="embedding search cap (default FRAISSE_NODE_BUDGET or 10^6)")

    p = _Parser(prog="fraisse", description="Exact workbench for finite metric structures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check the axioms of a structure file")
    sp.add_argument("file")

    sp = add("embs", cmd_embs, "enumerate Emb(A, B)")
    sp.add_argument("source")
    sp.add_argument("target")

    sp = add("rho", cmd_rho, "generator distance between two embeddings")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--alpha", type=_mapping, required=True)
    sp.add_argument("--beta", type=_mapping, required=True)

    sp = add("amalgamate", cmd_amalgamate, "free amalgam of B0 and B1 over A")
    sp.add_argument("base")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--phi0", type=_mapping, required=True)
    sp.add_argument("--phi1", type=_mapping, required=True)

    sp = add("jep", cmd_jep, "joint embedding of two structures")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--min-separation", type=_rational, default=Fraction(1))

    sp = add("dist", cmd_dist, "exact distance between two generator tuples")
    sp.add_argument("x")
    sp.add_argument("y")
    sp.add_argument("--witness", action="store_true", help="also print an optimal joint embedding")

    sp = add("extend", cmd_extend, "one-point extension")
    sp.add_argument("file")
    sp.add_argument("--point", required=True)
    sp.add_argument("--dist", type=_rational_mapping, required=True, help="x=p/q,...")
    sp.add_argument("--value", type=_rational_mapping, help="P=p/q,...")

    sp = add("power", cmd_power, "normalized l1 power")
    sp.add_argument("file")
    sp.add_argument("--n", type=_positive_int, required=True)
    sp.add_argument("--cap", type=_positive_int, default=4096)

    for name, func, help_ in (("ramsey-check", cmd_ramsey_check, "decide an approximate Ramsey instance"),
                              ("worst-coloring", cmd_worst_coloring, "exact worst coloring value"),
                              ("best-beta", cmd_best_beta, "best copy of B for a coloring")):
        sp = add(name, func, help_)
        sp.add_argument("a", metavar="A")
        sp.add_argument("b", metavar="B")
        sp.add_argument("c", metavar="C")
        sp.add_argument("--eps", type=_rational, required=True)
        sp.add_argument("--F", type=_mapping, action="append",
                        help="a member of F as a=x,...; repeat; default all of Emb(A, B)")
        if name == "best-beta":
            sp.add_argument("--coloring", help="file of 'images... value' lines")
            sp.add_argument("--seed", type=int)
        else:
            sp.add_argument("--budget", type=_positive_int, default=None,
                            help="branch-and-bound node budget")

    sp = add("conc-n", cmd_conc_n, "power size from the bounded-differences bound")
    sp.add_argument("--diam", type=_rational, required=True)
    sp.add_argument("--eps", type=_rational, required=True)
    sp.add_argument("--k", type=_positive_int, required=True)

    for name, func, help_ in (("levy-sim", cmd_levy_sim, "empirical concentration on H^n"),
                              ("witness", cmd_witness, "search a diagonal witness")):
        sp = add(name, func, help_)
        sp.add_argument("carrier")
        sp.add_argument("--gen", type=_mapping, action="append", required=True,
                        help="automorphism as x=y,...; repeat")
        sp.add_argument("--eps", type=_rational, required=True)
        sp.add_argument("--seed", type=int, required=True)
        if name == "levy-sim":
            sp.add_argument("--n", type=_int_list, required=True, help="comma-separated powers")
            sp.add_argument("--samples", type=_positive_int, default=10_000)
            sp.add_argument("--function", choices=("point", "set"), default="point")
        else:
            sp.add_argument("--sub", required=True, help="points of A, comma-separated")
            sp.add_argument("--n", type=_positive_int, default=None)
            sp.add_argument("--budget", type=_positive_int, default=100)
            sp.add_argument("--anchors", type=_positive_int, default=8)

    for name, func, help_ in (("eppa", cmd_eppa, "search a structure extending all partial automorphisms"),
                              ("wep", cmd_wep, "automorphisms approximating given embeddings")):
        sp = add(name, func, help_)
        if name == "eppa":
            sp.add_argument("file")
        else:
            sp.add_argument("source")
            sp.add_argument("target")
            sp.add_argument("--alpha", type=_mapping, action="append", required=True)
            sp.add_argument("--eps", type=_rational, default=Fraction(0))
        sp.add_argument("--max-extra-points", type=int, default=2)
        sp.add_argument("--max-candidates", type=_positive_int, default=200_000)
        sp.add_argument("--max-denominator", type=_positive_int, default=None)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except UsageError as exc:
        print(f"fraisse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"fraisse: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    except StructureSyntaxError as exc:
        print(f"fraisse: syntax error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except StructureValidationError as exc:
        print("fraisse: invalid structure: " + "; ".join(exc.diagnostics), file=sys.stderr)
        return EXIT_DATA
    except (EnumerationLimitError, ) as exc:
        print(f"fraisse: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except (DataError, AmalgamationError, ExtensionError, NoJointEmbedding, ResourceCapError,
            ValueError) as exc:
        print(f"fraisse: {exc}", file=sys.stderr)
        return EXIT_DATA
    text = buf.getvalue()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
