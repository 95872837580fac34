"""JSON interchange for complexes, algebras, morphisms and homotopies.

Document layout:

    {
      "schema_version": "1",
      "field": {"kind": "rational"} | {"kind": "prime_field", "p": 32003},
      "objects": {
        "A":  {"type": "twisted_complex", "dims": [[i, j, rank], ...],
               "d": {"1": {"bidegree": [-1, 0],
                            "blocks": [{"src": [i, j], "matrix": [[...]]}]}}},
        "f":  {"type": "twisted_morphism", "src": "A", "dst": "B",
               "f": {"0": {...}}},
        "h":  {"type": "r_homotopy", "r": 1, "f": "f", "g": "g",
               "h": {"0": {...}}},
        "L":  {"type": "dainf_algebra", "dims": ..., "m": {"0,2": {...}}},
        "p":  {"type": "dainf_morphism", "src": ..., "dst": ...,
               "f": {"0,1": {...}}},
        "H":  {"type": "dainf_homotopy", "r": 0, "f": ..., "g": ...,
               "h": {"0,1": {...}}},
        "K":  {"type": "filtered_complex", "dims": ..., "d": {"0": [[...]]}},
        "FA": {"type": "filtered_ainf", "dims": ...,
               "m": {"1": {"0": [[...]]}, "2": {...}}},
        "u":  {"type": "bigraded_map", "src": ..., "dst": ...,
               "bidegree": [p, q], "blocks": [...]}
      }
    }

Matrices act on column vectors and are written as row lists; basis order
is declaration order (for totalizations: columns ascending, then basis
order).  Rationals are "a/b" strings or integers, prime-field entries are
integers in [0, p).  Missing blocks are zero maps.
"""

from __future__ import annotations

import json

from .bigraded import BigradedMap, BigradedModule
from .dainf import DAInfAlgebra, DAInfHomotopy, DAInfMorphism
from .filtered_ainf import FilteredAInf
from .filtration import FilteredComplex
from .linalg import Field, Matrix
from .twisted import RHomotopy, TwistedComplex, TwistedMorphism

SCHEMA_VERSION = "1"


class DocumentError(ValueError):
    """Schema or reference error in an interchange document (exit 2)."""


def parse_field(payload) -> Field:
    if not isinstance(payload, dict) or "kind" not in payload:
        raise DocumentError("field must be an object with a 'kind'")
    kind = payload["kind"]
    try:
        if kind == "rational":
            return Field("rational")
        if kind == "prime_field":
            return Field("prime_field", int(payload.get("p", 0)))
    except ValueError as exc:
        raise DocumentError(str(exc)) from None
    raise DocumentError(f"unknown field kind {kind!r}")


def dump_field(field: Field):
    if field.kind == "rational":
        return {"kind": "rational"}
    return {"kind": "prime_field", "p": field.p}


def parse_dims(field: Field, payload) -> BigradedModule:
    if not isinstance(payload, list):
        raise DocumentError("dims must be a list of [i, j, rank] triples")
    dims = {}
    for entry in payload:
        if (not isinstance(entry, list) or len(entry) != 3
                or not all(isinstance(x, int) for x in entry)):
            raise DocumentError(f"bad dims entry {entry!r}")
        i, j, n = entry
        if n < 0:
            raise DocumentError(f"negative rank at {(i, j)}")
        if (i, j) in dims:
            raise DocumentError(f"duplicate dims entry at {(i, j)}")
        if n:
            dims[(i, j)] = n
    return BigradedModule(field, dims)


def dump_dims(module: BigradedModule):
    return [[i, j, n] for (i, j), n in sorted(module.dims.items())]


def parse_matrix(field: Field, payload, rows: int, cols: int) -> Matrix:
    if not isinstance(payload, list) or len(payload) != rows or \
            any(not isinstance(r, list) or len(r) != cols for r in payload):
        raise DocumentError(f"matrix must be {rows}x{cols} row lists")
    data = []
    try:
        for row in payload:
            for v in row:
                data.append(field.parse(v))
    except (ValueError, ZeroDivisionError) as exc:
        raise DocumentError(f"bad matrix entry: {exc}") from None
    return Matrix(field, rows, cols, data)


def dump_matrix(field: Field, m: Matrix):
    return [[field.dump(m[r, c]) for c in range(m.cols)] for r in range(m.rows)]


def parse_map(field: Field, payload, src: BigradedModule, dst: BigradedModule,
              expected_bidegree=None) -> BigradedMap:
    if not isinstance(payload, dict) or "bidegree" not in payload:
        raise DocumentError("map payload needs a 'bidegree'")
    bid = payload["bidegree"]
    if (not isinstance(bid, list) or len(bid) != 2
            or not all(isinstance(x, int) for x in bid)):
        raise DocumentError(f"bad bidegree {bid!r}")
    bid = (bid[0], bid[1])
    if expected_bidegree is not None and bid != expected_bidegree:
        raise DocumentError(f"bidegree {list(bid)} does not match the "
                            f"expected {list(expected_bidegree)}")
    blocks = {}
    for entry in payload.get("blocks", []):
        if not isinstance(entry, dict) or "src" not in entry or \
                "matrix" not in entry:
            raise DocumentError("map block needs 'src' and 'matrix'")
        si, sj = entry["src"]
        rows = dst.dim(si + bid[0], sj + bid[1])
        cols = src.dim(si, sj)
        if cols == 0:
            raise DocumentError(f"map block at {(si, sj)} has no source")
        mat = parse_matrix(field, entry["matrix"], rows, cols)
        if (si, sj) in blocks:
            raise DocumentError(f"duplicate map block at {(si, sj)}")
        blocks[(si, sj)] = mat
    try:
        return BigradedMap(src, dst, bid, blocks)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


def dump_map(field: Field, m: BigradedMap):
    return {
        "bidegree": list(m.bidegree),
        "blocks": [{"src": [i, j], "matrix": dump_matrix(field, blk)}
                   for (i, j), blk in sorted(m.blocks.items())],
    }


def _parse_indexed_maps(field, payload, src, dst, bidegree_of, what):
    out = {}
    if payload is None:
        return out
    if not isinstance(payload, dict):
        raise DocumentError(f"{what} must map indices to map payloads")
    for key, mp in payload.items():
        try:
            idx = int(key)
        except ValueError:
            raise DocumentError(f"bad {what} index {key!r}") from None
        if idx < 0:
            raise DocumentError(f"negative {what} index {idx}")
        out[idx] = parse_map(field, mp, src, dst, bidegree_of(idx))
    return out


def _parse_pair_indexed_maps(field, payload, src_of, dst, bidegree_of, what,
                             min_second=1):
    out = {}
    if payload is None:
        return out
    if not isinstance(payload, dict):
        raise DocumentError(f"{what} must map 'i,j' indices to map payloads")
    for key, mp in payload.items():
        parts = key.split(",")
        try:
            i, j = int(parts[0]), int(parts[1])
        except (ValueError, IndexError):
            raise DocumentError(f"bad {what} index {key!r}") from None
        if i < 0 or j < min_second:
            raise DocumentError(f"bad {what} index {(i, j)}")
        out[(i, j)] = parse_map(field, mp, src_of(j), dst, bidegree_of(i, j))
    return out


class Document:
    def __init__(self, field: Field, objects: dict):
        self.field = field
        self.objects = objects

    def of_type(self, *classes) -> dict:
        return {name: obj for name, obj in self.objects.items()
                if isinstance(obj, classes)}

    def select(self, name: str | None, *classes, what: str = "object"):
        cands = self.of_type(*classes)
        if name is not None:
            if name not in cands:
                raise DocumentError(f"no {what} named {name!r} in the document")
            return name, cands[name]
        if len(cands) == 1:
            return next(iter(cands.items()))
        if not cands:
            raise DocumentError(f"document has no {what}")
        raise DocumentError(
            f"document has several {what}s ({', '.join(sorted(cands))}); "
            f"select one with --name")


def load_document(payload: dict) -> Document:
    if not isinstance(payload, dict):
        raise DocumentError("document must be a JSON object")
    if payload.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version "
                            f"{payload.get('schema_version')!r}")
    field = parse_field(payload.get("field"))
    raw = payload.get("objects", {})
    if not isinstance(raw, dict):
        raise DocumentError("objects must be a JSON object")
    objects: dict = {}
    pending = dict(raw)
    # resolve in dependency order: complexes/algebras first, then maps,
    # then homotopies
    for stage in (0, 1, 2):
        for name, obj in sorted(pending.items()):
            if not isinstance(obj, dict) or "type" not in obj:
                raise DocumentError(f"object {name!r} needs a 'type'")
            t = obj["type"]
            order = {"twisted_complex": 0, "dainf_algebra": 0,
                     "filtered_complex": 0, "filtered_ainf": 0,
                     "twisted_morphism": 1, "dainf_morphism": 1,
                     "bigraded_map": 1,
                     "r_homotopy": 2, "dainf_homotopy": 2}.get(t)
            if order is None:
                raise DocumentError(f"object {name!r} has unknown type {t!r}")
            if order != stage:
                continue
            objects[name] = _parse_object(field, name, obj, objects)
    return Document(field, objects)


def _require(objects, name, classes, what):
    if name not in objects:
        raise DocumentError(f"reference to unknown object {name!r}")
    if not isinstance(objects[name], classes):
        raise DocumentError(f"object {name!r} is not a {what}")
    return objects[name]


def _parse_object(field, name, obj, objects):
    t = obj["type"]
    try:
        if t == "twisted_complex":
            module = parse_dims(field, obj.get("dims"))
            d = _parse_indexed_maps(field, obj.get("d"), module, module,
                                    lambda m: (-m, -m + 1), "d")
            return TwistedComplex(module, d)
        if t == "twisted_morphism":
            src = _require(objects, obj.get("src"), TwistedComplex,
                           "twisted complex")
            dst = _require(objects, obj.get("dst"), TwistedComplex,
                           "twisted complex")
            f = _parse_indexed_maps(field, obj.get("f"), src.module,
                                    dst.module, lambda m: (-m, -m), "f")
            return TwistedMorphism(src, dst, f)
        if t == "r_homotopy":
            r = obj.get("r")
            if not isinstance(r, int) or r < 0:
                raise DocumentError(f"bad homotopy level {r!r}")
            f = _require(objects, obj.get("f"), TwistedMorphism, "morphism")
            g = _require(objects, obj.get("g"), TwistedMorphism, "morphism")
            h = _parse_indexed_maps(field, obj.get("h"), f.src.module,
                                    f.dst.module,
                                    lambda m: (-m + r, -m + r - 1), "h")
            return RHomotopy(r, f, g, h)
        if t == "dainf_algebra":
            from .bigraded import power_module
            module = parse_dims(field, obj.get("dims"))
            m = _parse_pair_indexed_maps(
                field, obj.get("m"), lambda j: power_module(module, j),
                module, lambda i, j: (-i, 2 - i - j), "m")
            return DAInfAlgebra(module, m)
        if t == "dainf_morphism":
            from .bigraded import power_module
            src = _require(objects, obj.get("src"), DAInfAlgebra,
                           "dainf algebra")
            dst = _require(objects, obj.get("dst"), DAInfAlgebra,
                           "dainf algebra")
            f = _parse_pair_indexed_maps(
                field, obj.get("f"), lambda j: power_module(src.module, j),
                dst.module, lambda i, j: (-i, 1 - i - j), "f")
            return DAInfMorphism(src, dst, f)
        if t == "dainf_homotopy":
            from .bigraded import power_module
            r = obj.get("r")
            if not isinstance(r, int) or r < 0:
                raise DocumentError(f"bad homotopy level {r!r}")
            f = _require(objects, obj.get("f"), DAInfMorphism, "dainf morphism")
            g = _require(objects, obj.get("g"), DAInfMorphism, "dainf morphism")
            h = _parse_pair_indexed_maps(
                field, obj.get("h"), lambda k: power_module(f.src.module, k),
                f.dst.module, lambda i, k: (r - i, r - i - k), "h")
            return DAInfHomotopy(r, f, g, h)
        if t == "filtered_complex":
            from .filtration import tot_basis
            module = parse_dims(field, obj.get("dims"))
            d = {}
            for key, mat in (obj.get("d") or {}).items():
                n = int(key)
                rows = len(tot_basis(module, n + 1))
                cols = len(tot_basis(module, n))
                d[n] = parse_matrix(field, mat, rows, cols)
            return FilteredComplex(module, d)
        if t == "filtered_ainf":
            from .filtered_ainf import power_basis
            from .filtration import tot_basis
            module = parse_dims(field, obj.get("dims"))
            ms = {}
            for kkey, per in (obj.get("m") or {}).items():
                k = int(kkey)
                if k < 1:
                    raise DocumentError(f"bad arity {k}")
                ms[k] = {}
                for nkey, mat in per.items():
                    n = int(nkey)
                    rows = len(tot_basis(module, n + 2 - k))
                    cols = len(power_basis(module, k, n))
                    ms[k][n] = parse_matrix(field, mat, rows, cols)
            return FilteredAInf(module, ms)
        if t == "bigraded_map":
            src = _require(objects, obj.get("src"),
                           (TwistedComplex, DAInfAlgebra), "complex/algebra")
            dst = _require(objects, obj.get("dst"),
                           (TwistedComplex, DAInfAlgebra), "complex/algebra")
            return parse_map(field, obj, src.module, dst.module)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(f"object {name!r}: {exc}") from None
    raise DocumentError(f"object {name!r} has unknown type {t!r}")


# ---------------------------------------------------------------------------
# dumping
# ---------------------------------------------------------------------------

def dump_twisted(field, a: TwistedComplex):
    return {"type": "twisted_complex", "dims": dump_dims(a.module),
            "d": {str(m): dump_map(field, dm) for m, dm in sorted(a.d.items())}}


def dump_twisted_morphism(field, f: TwistedMorphism, src: str, dst: str):
    return {"type": "twisted_morphism", "src": src, "dst": dst,
            "f": {str(m): dump_map(field, fm) for m, fm in sorted(f.f.items())}}


def dump_r_homotopy(field, h: RHomotopy, fname: str, gname: str):
    return {"type": "r_homotopy", "r": h.r, "f": fname, "g": gname,
            "h": {str(m): dump_map(field, hm) for m, hm in sorted(h.h.items())}}


def dump_dainf(field, a: DAInfAlgebra):
    return {"type": "dainf_algebra", "dims": dump_dims(a.module),
            "m": {f"{i},{j}": dump_map(field, mij)
                  for (i, j), mij in sorted(a.m.items())}}


def dump_dainf_morphism(field, f: DAInfMorphism, src: str, dst: str):
    return {"type": "dainf_morphism", "src": src, "dst": dst,
            "f": {f"{i},{j}": dump_map(field, fij)
                  for (i, j), fij in sorted(f.f.items())}}


def dump_dainf_homotopy(field, h: DAInfHomotopy, fname: str, gname: str):
    return {"type": "dainf_homotopy", "r": h.r, "f": fname, "g": gname,
            "h": {f"{i},{k}": dump_map(field, hik)
                  for (i, k), hik in sorted(h.h.items())}}


def dump_filtered(field, k: FilteredComplex):
    return {"type": "filtered_complex", "dims": dump_dims(k.module),
            "d": {str(n): dump_matrix(field, mat)
                  for n, mat in sorted(k.d.items())}}


def dump_filtered_ainf(field, fa: FilteredAInf):
    return {"type": "filtered_ainf", "dims": dump_dims(fa.module),
            "m": {str(k): {str(n): dump_matrix(field, mat)
                           for n, mat in sorted(per.items())}
                  for k, per in sorted(fa.ms.items())}}


def dump_bigraded_map(field, m: BigradedMap, src: str, dst: str):
    out = dump_map(field, m)
    out.update({"type": "bigraded_map", "src": src, "dst": dst})
    return out


def document_json(field: Field, objects: dict) -> str:
    payload = {"schema_version": SCHEMA_VERSION, "field": dump_field(field),
               "objects": objects}
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
