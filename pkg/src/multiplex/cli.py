"""Command line front end.

Exit codes: 0 = all checks passed / construction succeeded,
1 = a verified mathematical failure (the report lists locations),
2 = input, schema or usage error.

Every construction subcommand re-validates its output before writing.
MULTIPLEX_THREADS caps the worker threads used for page computations.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from . import io as mio
from .dainf import (
    DAInfAlgebra, DAInfHomotopy, DAInfMorphism, check_dainf,
    check_dainf_morphism, check_r_homotopy_dainf, compose_dainf,
    path_dainf, underlying_twisted_morphism,
)
from .filtered_ainf import FilteredAInf, check_filtered_ainf
from .filtration import FilteredComplex, check_filtered_complex, tot, tot_inverse
from .generators import random_twisted_complex
from .io import Document, DocumentError, load_document
from .linalg import GF, QQ, DEFAULT_PRIME, Field
from .operadic import check_coderh, default_truncation
from .reports import Report
from .spectral import is_er_quasi_iso, is_er_quasi_iso_via_cone, spectral_page
from .twisted import (
    RHomotopy, TwistedComplex, TwistedMorphism, check_morphism,
    check_r_homotopy, check_twisted, compose, cone, path, solve_r_homotopy,
    tensor,
)


def _read(path: str) -> Document:
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON: {exc}") from None
    return load_document(payload)


def _emit(doc_json: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(doc_json)
    else:
        sys.stdout.write(doc_json)


def _print_reports(reports: list[tuple[str, Report]], as_json: bool) -> int:
    if as_json:
        payload = [dict(name=name, **rep.to_dict()) for name, rep in reports]
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for name, rep in reports:
            print(f"{name}: {rep}")
    return 0 if all(rep.ok for _, rep in reports) else 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_check(args) -> int:
    doc = _read(args.file)
    kind = {
        "twisted": (TwistedComplex, check_twisted),
        "morphism": (TwistedMorphism, check_morphism),
        "dainf": (DAInfAlgebra, check_dainf),
        "dainf-morphism": (DAInfMorphism, check_dainf_morphism),
        "filtered-ainf": (FilteredAInf, check_filtered_ainf),
        "filtered": (FilteredComplex, check_filtered_complex),
    }[args.what]
    cls, checker = kind
    targets = doc.of_type(cls)
    if args.name is not None:
        name, obj = doc.select(args.name, cls, what=args.what)
        targets = {name: obj}
    if not targets:
        raise DocumentError(f"document has no {args.what} objects")
    reports = [(name, checker(obj)) for name, obj in sorted(targets.items())]
    return _print_reports(reports, args.format == "json")


def cmd_tot(args) -> int:
    doc = _read(args.file)
    name, a = doc.select(args.name, TwistedComplex, what="twisted complex")
    rep = check_twisted(a)
    if not rep.ok:
        print(rep)
        return 1
    k = tot(a)
    check_filtered_complex(k).raise_if_failed()
    objects = {name + "_tot": mio.dump_filtered(doc.field, k)}
    _emit(mio.document_json(doc.field, objects), args.output)
    return 0


def cmd_tot_inverse(args) -> int:
    doc = _read(args.file)
    name, k = doc.select(args.name, FilteredComplex, what="filtered complex")
    rep = check_filtered_complex(k)
    if not rep.ok:
        print(rep)
        return 1
    a = tot_inverse(k)
    objects = {name + "_twisted": mio.dump_twisted(doc.field, a)}
    _emit(mio.document_json(doc.field, objects), args.output)
    return 0


def cmd_spectral(args) -> int:
    doc = _read(args.file)
    name, obj = doc.select(args.name, TwistedComplex, FilteredComplex,
                           what="complex")
    if isinstance(obj, TwistedComplex):
        rep = check_twisted(obj)
        if not rep.ok:
            print(rep)
            return 1
    page = spectral_page(obj, args.page)
    entries = {f"{p},{q}": page.dim(p, q) for (p, q) in sorted(page.entries)
               if page.dim(p, q)}
    if args.format == "json":
        payload = {
            "object": name,
            "page": args.page,
            "dims": entries,
            "delta": {f"{p},{q}": mio.dump_matrix(doc.field, m)
                      for (p, q), m in sorted(page.delta.items())},
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(f"E_{args.page}({name})")
        if not entries:
            print("  (zero page)")
        for key, dim in sorted(entries.items()):
            print(f"  ({key}): dimension {dim}")
        for (p, q) in sorted(page.delta):
            print(f"  delta at ({p},{q}) -> ({p - args.page},"
                  f"{q - args.page + 1}):")
            for row in mio.dump_matrix(doc.field, page.delta[(p, q)]):
                print("    " + " ".join(str(v) for v in row))
    return 0


def cmd_er_qis(args) -> int:
    doc = _read(args.file)
    name, f = doc.select(args.name, TwistedMorphism, DAInfMorphism,
                         what="morphism")
    if isinstance(f, DAInfMorphism):
        f = underlying_twisted_morphism(f)
    rep = check_morphism(f)
    if not rep.ok:
        print(rep)
        return 1
    if args.via_cone:
        verdict = is_er_quasi_iso_via_cone(f, args.r)
    else:
        verdict = is_er_quasi_iso(f, args.r)
    how = "via the cone criterion" if args.via_cone else "via induced pages"
    print(f"{name}: E_{args.r}-quasi-isomorphism = {verdict} ({how})")
    return 0 if verdict else 1


def cmd_cone(args) -> int:
    doc = _read(args.file)
    name, f = doc.select(args.name, TwistedMorphism, what="morphism")
    rep = check_morphism(f)
    if not rep.ok:
        print(rep)
        return 1
    c = cone(f, args.r)
    field = doc.field
    objects = {
        "source": mio.dump_twisted(field, f.src),
        "target": mio.dump_twisted(field, f.dst),
        name: mio.dump_twisted_morphism(field, f, "source", "target"),
        "cone": mio.dump_twisted(field, c.complex),
        "translation": mio.dump_twisted(field, c.projection.dst),
        "inclusion": mio.dump_twisted_morphism(field, c.inclusion,
                                               "target", "cone"),
        "projection": mio.dump_twisted_morphism(field, c.projection,
                                                "cone", "translation"),
    }
    _emit(mio.document_json(field, objects), args.output)
    return 0


def cmd_path(args) -> int:
    doc = _read(args.file)
    field = doc.field
    if args.dainf:
        name, a = doc.select(args.name, DAInfAlgebra, what="dainf algebra")
        rep = check_dainf(a)
        if not rep.ok:
            print(rep)
            return 1
        p = path_dainf(a, args.r)
        objects = {
            name: mio.dump_dainf(field, a),
            "path": mio.dump_dainf(field, p.algebra),
            "iota": mio.dump_dainf_morphism(field, p.iota, name, "path"),
            "boundary_minus": mio.dump_dainf_morphism(field, p.p_minus,
                                                      "path", name),
            "boundary_plus": mio.dump_dainf_morphism(field, p.p_plus,
                                                     "path", name),
            "boundary_zero": mio.dump_bigraded_map(field, p.p_zero,
                                                   "path", name),
        }
    else:
        name, a = doc.select(args.name, TwistedComplex, what="twisted complex")
        rep = check_twisted(a)
        if not rep.ok:
            print(rep)
            return 1
        p = path(a, args.r)
        objects = {
            name: mio.dump_twisted(field, a),
            "path": mio.dump_twisted(field, p.complex),
            "iota": mio.dump_twisted_morphism(field, p.iota, name, "path"),
            "boundary_minus": mio.dump_twisted_morphism(field, p.p_minus,
                                                        "path", name),
            "boundary_plus": mio.dump_twisted_morphism(field, p.p_plus,
                                                       "path", name),
            "boundary_zero": mio.dump_bigraded_map(field, p.p_zero,
                                                   "path", name),
        }
    _emit(mio.document_json(field, objects), args.output)
    return 0


def cmd_homotopy(args) -> int:
    doc = _read(args.file)
    field = doc.field
    if args.action == "check":
        if args.dainf:
            name, h = doc.select(args.name, DAInfHomotopy,
                                 what="dainf homotopy")
            if args.r is not None and args.r != h.r:
                raise DocumentError(f"homotopy {name!r} has level {h.r}, "
                                    f"not {args.r}")
            rep = check_r_homotopy_dainf(h)
        else:
            name, h = doc.select(args.name, RHomotopy, what="homotopy")
            if args.r is not None and args.r != h.r:
                raise DocumentError(f"homotopy {name!r} has level {h.r}, "
                                    f"not {args.r}")
            rep = check_r_homotopy(h)
        return _print_reports([(name, rep)], args.format == "json")
    # solve
    if args.dainf:
        raise DocumentError("homotopy solving is implemented for twisted "
                            "complexes only")
    if args.r is None:
        raise DocumentError("homotopy solve needs -r")
    if args.f is None and args.g is None:
        morphisms = sorted(doc.of_type(TwistedMorphism))
        if len(morphisms) != 2:
            raise DocumentError("homotopy solve needs exactly two morphisms "
                                "or explicit --f/--g names")
        fname, gname = morphisms
        f, g = doc.objects[fname], doc.objects[gname]
    else:
        fname, f = doc.select(args.f, TwistedMorphism, what="morphism")
        gname, g = doc.select(args.g, TwistedMorphism, what="morphism")
    for nm, mor in ((fname, f), (gname, g)):
        rep = check_morphism(mor)
        if not rep.ok:
            print(f"{nm}: {rep}")
            return 1
    h = solve_r_homotopy(f, g, args.r)
    if h is None:
        print(f"no {args.r}-homotopy from {fname} to {gname}")
        return 1
    objects = {
        "source": mio.dump_twisted(field, f.src),
        "target": mio.dump_twisted(field, f.dst),
        fname: mio.dump_twisted_morphism(field, f, "source", "target"),
        gname: mio.dump_twisted_morphism(field, g, "source", "target"),
        "homotopy": mio.dump_r_homotopy(field, h, fname, gname),
    }
    _emit(mio.document_json(field, objects), args.output)
    return 0


def cmd_tensor(args) -> int:
    doc_a = _read(args.file_a)
    doc_b = _read(args.file_b)
    if doc_a.field != doc_b.field:
        raise DocumentError("the two documents use different fields")
    name_a, a = doc_a.select(args.name_a, TwistedComplex,
                             what="twisted complex")
    name_b, b = doc_b.select(args.name_b, TwistedComplex,
                             what="twisted complex")
    for nm, obj in ((name_a, a), (name_b, b)):
        rep = check_twisted(obj)
        if not rep.ok:
            print(f"{nm}: {rep}")
            return 1
    t = tensor(a, b)
    objects = {f"{name_a}_tensor_{name_b}": mio.dump_twisted(doc_a.field, t)}
    _emit(mio.document_json(doc_a.field, objects), args.output)
    return 0


def cmd_compose(args) -> int:
    doc_f = _read(args.file_f)
    doc_g = _read(args.file_g)
    if doc_f.field != doc_g.field:
        raise DocumentError("the two documents use different fields")
    field = doc_f.field
    if args.dainf:
        fname, f = doc_f.select(args.name_f, DAInfMorphism,
                                what="dainf morphism")
        gname, g = doc_g.select(args.name_g, DAInfMorphism,
                                what="dainf morphism")
        if g.dst != f.src:
            raise DocumentError("morphisms are not composable: the target "
                                "of g must be the source of f")
        out = compose_dainf(f, g)
        objects = {
            "source": mio.dump_dainf(field, g.src),
            "target": mio.dump_dainf(field, f.dst),
            "composite": mio.dump_dainf_morphism(field, out, "source",
                                                 "target"),
        }
    else:
        fname, f = doc_f.select(args.name_f, TwistedMorphism, what="morphism")
        gname, g = doc_g.select(args.name_g, TwistedMorphism, what="morphism")
        if g.dst != f.src:
            raise DocumentError("morphisms are not composable: the target "
                                "of g must be the source of f")
        out = compose(f, g)
        objects = {
            "source": mio.dump_twisted(field, g.src),
            "target": mio.dump_twisted(field, f.dst),
            "composite": mio.dump_twisted_morphism(field, out, "source",
                                                   "target"),
        }
    _emit(mio.document_json(field, objects), args.output)
    return 0


def cmd_oracle(args) -> int:
    doc = _read(args.file)
    name, h = doc.select(args.name, RHomotopy, what="homotopy")
    if args.r is not None and args.r != h.r:
        raise DocumentError(f"homotopy {name!r} has level {h.r}, not {args.r}")
    n = args.n if args.n is not None else default_truncation(h)
    try:
        verdict = check_coderh(h, n)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None
    print(f"{name}: coderivation identity at truncation {n} = {verdict} "
          f"(agrees with the direct homotopy checker)")
    return 0 if verdict else 1


def cmd_gen(args) -> int:
    if args.what != "random-twisted":
        raise DocumentError(f"unknown generator {args.what!r}")
    field = QQ if args.field == "rational" else GF(args.p)
    cols, verts, max_rank = args.cols, args.verts, args.max_rank
    if args.dims:
        parts = args.dims.split(",")
        if len(parts) != 3:
            raise DocumentError("--dims must look like "
                                "IMIN:IMAX,JMIN:JMAX,MAXRANK")
        cols, verts, rank_s = parts
        try:
            max_rank = int(rank_s)
        except ValueError:
            raise DocumentError(f"bad rank {rank_s!r}") from None
    try:
        imin, imax = (int(x) for x in cols.split(":"))
        jmin, jmax = (int(x) for x in verts.split(":"))
    except ValueError:
        raise DocumentError("ranges must look like IMIN:IMAX") from None
    rng = random.Random(args.seed)
    a = random_twisted_complex(field, rng, cols=(imin, imax),
                               verts=(jmin, jmax), max_rank=max_rank,
                               spots=args.spots)
    check_twisted(a).raise_if_failed()
    objects = {"random": mio.dump_twisted(field, a)}
    _emit(mio.document_json(field, objects), args.output)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="multiplex",
        description="exact computations with twisted complexes, spectral "
                    "sequences and derived A-infinity algebras")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, output=True):
        p.add_argument("--name", help="object name inside the document")
        p.add_argument("--format", choices=("table", "json"),
                       default="table")
        if output:
            p.add_argument("-o", "--output", help="write the result here "
                           "instead of stdout")

    p = sub.add_parser("check", help="verify structure axioms")
    p.add_argument("what", choices=("twisted", "morphism", "dainf",
                                    "dainf-morphism", "filtered-ainf",
                                    "filtered"))
    p.add_argument("file")
    add_common(p, output=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("tot", help="totalize a twisted complex")
    p.add_argument("file")
    add_common(p)
    p.set_defaults(func=cmd_tot)

    p = sub.add_parser("tot-inverse", help="read a split filtered complex "
                       "back as a twisted complex")
    p.add_argument("file")
    add_common(p)
    p.set_defaults(func=cmd_tot_inverse)

    p = sub.add_parser("spectral", help="compute a spectral sequence page")
    p.add_argument("file")
    p.add_argument("--page", type=int, required=True)
    add_common(p, output=False)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("er-qis", help="decide E_r-quasi-isomorphism")
    p.add_argument("file")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--via-cone", action="store_true")
    add_common(p, output=False)
    p.set_defaults(func=cmd_er_qis)

    p = sub.add_parser("cone", help="build the r-cone of a morphism")
    p.add_argument("file")
    p.add_argument("-r", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_cone)

    p = sub.add_parser("path", help="build the r-path")
    p.add_argument("file")
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--dainf", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("homotopy", help="check or solve r-homotopies")
    p.add_argument("action", choices=("check", "solve"))
    p.add_argument("file")
    p.add_argument("-r", type=int)
    p.add_argument("--dainf", action="store_true")
    p.add_argument("--f", help="source-side morphism name (solve)")
    p.add_argument("--g", help="target-side morphism name (solve)")
    add_common(p)
    p.set_defaults(func=cmd_homotopy)

    p = sub.add_parser("tensor", help="tensor two twisted complexes")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p.add_argument("--name-a")
    p.add_argument("--name-b")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("compose", help="compose two morphisms (f after g)")
    p.add_argument("file_f")
    p.add_argument("file_g")
    p.add_argument("--dainf", action="store_true")
    p.add_argument("--name-f")
    p.add_argument("--name-g")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("oracle", help="coderivation cross-checks")
    p.add_argument("what", choices=("coderh",))
    p.add_argument("file")
    p.add_argument("-r", type=int)
    p.add_argument("-N", dest="n", type=int)
    add_common(p, output=False)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate random instances")
    p.add_argument("what", choices=("random-twisted",))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dims", help="compact size spec IMIN:IMAX,JMIN:JMAX,RANK")
    p.add_argument("--cols", default="0:3", help="column range IMIN:IMAX")
    p.add_argument("--verts", default="-1:3",
                   help="vertical offset range JMIN:JMAX")
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--spots", type=int, default=4)
    p.add_argument("--field", choices=("rational", "prime_field"),
                   default="prime_field")
    p.add_argument("--p", type=int, default=DEFAULT_PRIME)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # failed self-validation of a construction is a mathematical failure
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
