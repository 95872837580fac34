"""Derived A-infinity algebras: structure maps m_{ij}: A^{(x) j} -> A of
bidegree (-i, 2-i-j) satisfying the signed Stasheff relations

    sum (-1)^{rq+t+pj} m_{ij}(1^r (x) m_{pq} (x) 1^t) = 0,        (A_uv)

morphisms f_{ij} of bidegree (-i, 1-i-j) with relations (B_uv), twisted
dgas and their tensor products, the three-dimensional path dga Lambda_r,
functorial r-paths, and r-homotopies via the explicit (H_mk) conditions
cross-checked against the assembled morphism into the r-path.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct

from .bigraded import (
    BigradedMap, BigradedModule, compose as bcompose, direct_sum,
    hom_one_map_one, identity_map, interleave_iso, node,
    nary_tensor_maps, power_module, power_tree, shift_into, shift_out,
    tensor_maps, tensor_modules, tree_basis, tree_iso, unit_module, zero_map,
)
from .linalg import Field, Matrix
from .reports import Report
from .signs import (
    compose_sign, homotopy_beta, homotopy_sum1_sign, morphism_rhs_sign,
    structure_sign,
)
from .twisted import (
    RHomotopy, TwistedComplex, TwistedMorphism, check_twisted,
)

_POW_CACHE: dict = {}


def _pow(mod: BigradedModule, k: int) -> BigradedModule:
    key = (mod, k)
    out = _POW_CACHE.get(key)
    if out is None:
        out = power_module(mod, k)
        _POW_CACHE[key] = out
    return out


class DAInfAlgebra:
    """Bigraded module with finitely many structure maps m_{ij}."""

    __slots__ = ("module", "m")

    def __init__(self, module: BigradedModule,
                 m: dict[tuple[int, int], BigradedMap] | None = None):
        self.module = module
        self.m = {}
        for (i, j), mij in (m or {}).items():
            if i < 0 or j < 1:
                raise ValueError(f"bad structure index {(i, j)}")
            if mij.src != _pow(module, j) or mij.dst != module:
                raise ValueError(f"m_{(i, j)} has wrong source or target")
            if mij.bidegree != (-i, 2 - i - j):
                raise ValueError(f"m_{(i, j)} has bidegree {mij.bidegree}, "
                                 f"expected {(-i, 2 - i - j)}")
            if not mij.is_zero():
                self.m[(i, j)] = mij

    @property
    def field(self):
        return self.module.field

    def m_map(self, i: int, j: int) -> BigradedMap:
        mij = self.m.get((i, j))
        if mij is None:
            mij = zero_map(_pow(self.module, j), self.module, (-i, 2 - i - j))
        return mij

    def max_arity(self) -> int:
        return max((j for (_, j) in self.m), default=1)

    def __eq__(self, other):
        if not isinstance(other, DAInfAlgebra):
            return NotImplemented
        if self.module != other.module:
            return False
        keys = set(self.m) | set(other.m)
        return all(self.m_map(*k) == other.m_map(*k) for k in keys)

    def __repr__(self):
        return f"DAInfAlgebra(dims={dict(sorted(self.module.dims.items()))}, " \
               f"ops={sorted(self.m)})"


class TwistedDga(DAInfAlgebra):
    """dA-infinity algebra whose only operations are m_{i1} and m_{02}."""

    def __init__(self, module, m=None):
        super().__init__(module, m)
        for (i, j) in self.m:
            if j == 1:
                continue
            if (i, j) != (0, 2):
                raise ValueError(f"twisted dga cannot carry m_{(i, j)}")


class DAInfMorphism:
    __slots__ = ("src", "dst", "f")

    def __init__(self, src: DAInfAlgebra, dst: DAInfAlgebra,
                 f: dict[tuple[int, int], BigradedMap] | None = None):
        self.src = src
        self.dst = dst
        self.f = {}
        for (i, j), fij in (f or {}).items():
            if i < 0 or j < 1:
                raise ValueError(f"bad morphism index {(i, j)}")
            if fij.src != _pow(src.module, j) or fij.dst != dst.module:
                raise ValueError(f"f_{(i, j)} has wrong source or target")
            if fij.bidegree != (-i, 1 - i - j):
                raise ValueError(f"f_{(i, j)} has bidegree {fij.bidegree}, "
                                 f"expected {(-i, 1 - i - j)}")
            if not fij.is_zero():
                self.f[(i, j)] = fij

    @property
    def field(self):
        return self.src.field

    def f_map(self, i: int, j: int) -> BigradedMap:
        fij = self.f.get((i, j))
        if fij is None:
            fij = zero_map(_pow(self.src.module, j), self.dst.module,
                           (-i, 1 - i - j))
        return fij

    def is_strict(self) -> bool:
        return all(k == (0, 1) for k in self.f)

    def __eq__(self, other):
        if not isinstance(other, DAInfMorphism):
            return NotImplemented
        if self.src != other.src or self.dst != other.dst:
            return False
        keys = set(self.f) | set(other.f)
        return all(self.f_map(*k) == other.f_map(*k) for k in keys)

    def __repr__(self):
        return f"DAInfMorphism(support={sorted(self.f)})"


class DAInfHomotopy:
    """Candidate r-homotopy: components h_{ik} of bidegree (r-i, r-i-k)."""

    __slots__ = ("r", "f", "g", "h")

    def __init__(self, r: int, f: DAInfMorphism, g: DAInfMorphism,
                 h: dict[tuple[int, int], BigradedMap] | None = None):
        if r < 0:
            raise ValueError("r must be non-negative")
        if f.src != g.src or f.dst != g.dst:
            raise ValueError("f and g must be parallel")
        self.r = r
        self.f = f
        self.g = g
        self.h = {}
        for (i, k), hik in (h or {}).items():
            if i < 0 or k < 1:
                raise ValueError(f"bad homotopy index {(i, k)}")
            if hik.src != _pow(f.src.module, k) or hik.dst != f.dst.module:
                raise ValueError(f"h_{(i, k)} has wrong source or target")
            if hik.bidegree != (r - i, r - i - k):
                raise ValueError(f"h_{(i, k)} has bidegree {hik.bidegree}, "
                                 f"expected {(r - i, r - i - k)}")
            if not hik.is_zero():
                self.h[(i, k)] = hik

    @property
    def src(self):
        return self.f.src

    @property
    def dst(self):
        return self.f.dst

    def h_map(self, i: int, k: int) -> BigradedMap:
        hik = self.h.get((i, k))
        if hik is None:
            hik = zero_map(_pow(self.f.src.module, k), self.f.dst.module,
                           (self.r - i, self.r - i - k))
        return hik


def identity_dainf(a: DAInfAlgebra) -> DAInfMorphism:
    return DAInfMorphism(a, a, {(0, 1): identity_map(a.module)})


def zero_dainf_morphism(a: DAInfAlgebra, b: DAInfAlgebra) -> DAInfMorphism:
    return DAInfMorphism(a, b, {})


# ---------------------------------------------------------------------------
# n-ary tensor of morphism components with the regrouping bookkeeping
# ---------------------------------------------------------------------------

def _subpower_tree(mod: BigradedModule, arities: list[int]):
    t = power_tree(mod, arities[0])
    for q in arities[1:]:
        t = node(t, power_tree(mod, q))
    return t


def component_tensor(maps: list[BigradedMap], arities: list[int],
                     src_mod: BigradedModule) -> BigradedMap:
    """f_1 (x) ... (x) f_l: Pow(src, sum q_t) -> Pow(dst, l) with Koszul
    signs; f_t maps Pow(src, arities[t]) -> dst."""
    if len(maps) == 1:
        return maps[0]
    mid = nary_tensor_maps(maps)
    k = sum(arities)
    pre = tree_iso(power_tree(src_mod, k), _subpower_tree(src_mod, arities))
    return bcompose(mid, pre)


# ---------------------------------------------------------------------------
# axiom checkers
# ---------------------------------------------------------------------------

def check_dainf(a: DAInfAlgebra) -> Report:
    rep = Report("derived A-infinity relations (A_uv)")
    keys = sorted(a.m)
    buckets: dict[tuple[int, int], BigradedMap] = {}
    for (i, j) in keys:
        for (p, q) in keys:
            u, v = i + p, j + q - 1
            if (u, v) not in buckets:
                buckets[(u, v)] = zero_map(_pow(a.module, v), a.module,
                                           (-u, 3 - u - v))
    memo: dict = {}
    for (i, j) in keys:
        mij = a.m[(i, j)]
        for (p, q) in keys:
            mpq = a.m[(p, q)]
            u, v = i + p, j + q - 1
            for r in range(j):
                t = j - 1 - r
                mk = (p, q, r, t)
                inner = memo.get(mk)
                if inner is None:
                    inner = hom_one_map_one(mpq, a.module, r, t, q)
                    memo[mk] = inner
                term = bcompose(mij, inner)
                if structure_sign(r, q, t, p, j):
                    term = -term
                buckets[(u, v)] = buckets[(u, v)] + term
    for (u, v) in sorted(buckets):
        rep.tick()
        for loc in sorted(buckets[(u, v)].blocks):
            rep.fail((u, v) + loc, f"(A_{{{u}{v}}}) fails on the block at {loc}")
    return rep


def check_dainf_morphism(f: DAInfMorphism) -> Report:
    rep = Report("dA-infinity morphism relations (B_uv)")
    a, b = f.src, f.dst
    fk = sorted(f.f)
    buckets: dict[tuple[int, int], BigradedMap] = {}

    def bucket(u, v):
        if (u, v) not in buckets:
            buckets[(u, v)] = zero_map(_pow(a.module, v), b.module,
                                       (-u, 2 - u - v))
        return (u, v)

    memo: dict = {}
    for (i, j) in fk:
        fij = f.f[(i, j)]
        for (p, q) in sorted(a.m):
            mpq = a.m[(p, q)]
            u, v = i + p, j + q - 1
            key = bucket(u, v)
            for r in range(j):
                t = j - 1 - r
                mk = (p, q, r, t)
                inner = memo.get(mk)
                if inner is None:
                    inner = hom_one_map_one(mpq, a.module, r, t, q)
                    memo[mk] = inner
                term = bcompose(fij, inner)
                if structure_sign(r, q, t, p, j):
                    term = -term
                buckets[key] = buckets[key] + term
    tens_memo: dict = {}
    for (i, j) in sorted(b.m):
        mij = b.m[(i, j)]
        for parts in iproduct(fk, repeat=j):
            u = i + sum(p for (p, _) in parts)
            v = sum(q for (_, q) in parts)
            key = bucket(u, v)
            tens = tens_memo.get(parts)
            if tens is None:
                tens = component_tensor([f.f[pt] for pt in parts],
                                        [q for (_, q) in parts], a.module)
                tens_memo[parts] = tens
            term = bcompose(mij, tens)
            if morphism_rhs_sign(u, list(parts)):
                term = -term
            buckets[key] = buckets[key] - term
    for (u, v) in sorted(buckets):
        rep.tick()
        for loc in sorted(buckets[(u, v)].blocks):
            rep.fail((u, v) + loc, f"(B_{{{u}{v}}}) fails on the block at {loc}")
    return rep


# ---------------------------------------------------------------------------
# composition and inversion
# ---------------------------------------------------------------------------

def compose_dainf(f: DAInfMorphism, g: DAInfMorphism,
                  check: bool = True) -> DAInfMorphism:
    """f after g: (fg)_{uk} = sum (-1)^sigma f_{ij}(g_{p_1q_1} (x) ...)."""
    if g.dst != f.src:
        raise ValueError("source/target mismatch")
    comps: dict[tuple[int, int], BigradedMap] = {}
    gk = sorted(g.f)
    for (i, j) in sorted(f.f):
        fij = f.f[(i, j)]
        for parts in iproduct(gk, repeat=j):
            u = i + sum(p for (p, _) in parts)
            k = sum(q for (_, q) in parts)
            tens = component_tensor([g.f[pt] for pt in parts],
                                    [q for (_, q) in parts], g.src.module)
            term = bcompose(fij, tens)
            if compose_sign(list(parts)):
                term = -term
            key = (u, k)
            comps[key] = comps[key] + term if key in comps else term
    out = DAInfMorphism(g.src, f.dst,
                        {k: v for k, v in comps.items() if not v.is_zero()})
    if check:
        check_dainf_morphism(out).raise_if_failed()
    return out


def invert_dainf(f: DAInfMorphism, arity_cap: int = 8) -> DAInfMorphism | None:
    """Two-sided inverse when f_{01} is blockwise invertible, else None."""
    a, b = f.src, f.dst
    if a.module.dims.keys() != b.module.dims.keys():
        return None
    f01 = f.f_map(0, 1)
    inv_blocks = {}
    for (i, j), n in b.module.dims.items():
        if a.module.dim(i, j) != n:
            return None
        blk = f01.block(i, j).inverse()
        if blk is None:
            return None
        inv_blocks[(i, j)] = blk
    g01 = BigradedMap(b.module, a.module, (0, 0), inv_blocks)
    g: dict[tuple[int, int], BigradedMap] = {(0, 1): g01}
    # solve (f o g)_{uk} = (1)_{uk} by recursion on (k, u): the top term
    # is f_{01} g_{uk}, everything else uses components with smaller (k, u)
    tens_memo: dict = {}
    for k in range(1, arity_cap + 1):
        # u values where the map space is nonzero, from bidegree sumsets;
        # Pow(B, k) is only materialized when some term contributes
        u_cands = sorted(_reachable_u(b.module, a.module, k))
        for u in u_cands:
            if (u, k) == (0, 1):
                continue
            gk = sorted(g)  # includes same-arity entries with smaller u
            combos = []
            for (i, j) in sorted(f.f):
                for parts in iproduct(gk, repeat=j):
                    if sum(q for (_, q) in parts) != k:
                        continue
                    if i + sum(p for (p, _) in parts) != u:
                        continue
                    if (i, j) == (0, 1) and parts == ((u, k),):
                        continue
                    combos.append(((i, j), parts))
            if not combos:
                continue
            acc = zero_map(_pow(b.module, k), a.module, (-u, 1 - u - k))
            for (key, parts) in combos:
                tens = tens_memo.get(parts)
                if tens is None:
                    tens = component_tensor([g[pt] for pt in parts],
                                            [q for (_, q) in parts], b.module)
                    tens_memo[parts] = tens
                term = bcompose(f.f[key], tens)
                if compose_sign(list(parts)):
                    term = -term
                acc = acc + term
            guk = -bcompose(g01, acc)
            if not guk.is_zero():
                g[(u, k)] = guk
    ginv = DAInfMorphism(b, a, g)
    if compose_dainf(f, ginv, check=False) != identity_dainf(b) or \
       compose_dainf(ginv, f, check=False) != identity_dainf(a):
        raise RuntimeError(f"inverse not confirmed within arity cap {arity_cap}")
    check_dainf_morphism(ginv).raise_if_failed()
    return ginv


def _sumset(mod: BigradedModule, k: int) -> set[tuple[int, int]]:
    """Bidegrees appearing in the k-fold tensor power, without building it."""
    acc = set(mod.dims)
    for _ in range(k - 1):
        acc = {(i1 + i2, j1 + j2) for (i1, j1) in acc for (i2, j2) in mod.dims}
    return acc


def _reachable_u(src_mod: BigradedModule, dst_mod: BigradedModule,
                 k: int) -> set[int]:
    """u >= 0 for which a map Pow(src,k) -> dst of bidegree (-u, 1-u-k)
    has a nonzero block."""
    out = set()
    for (si, sj) in _sumset(src_mod, k):
        for (ti, tj) in dst_mod.dims:
            u = si - ti
            if u >= 0 and sj + 1 - u - k == tj:
                out.add(u)
    return out


# ---------------------------------------------------------------------------
# underlying twisted complex
# ---------------------------------------------------------------------------

def underlying_twisted(a: DAInfAlgebra) -> TwistedComplex:
    d = {i: mij for (i, j), mij in a.m.items() if j == 1}
    out = TwistedComplex(a.module, d)
    check_twisted(out).raise_if_failed()
    return out


def underlying_twisted_morphism(f: DAInfMorphism) -> TwistedMorphism:
    comps = {i: fij for (i, j), fij in f.f.items() if j == 1}
    return TwistedMorphism(underlying_twisted(f.src),
                           underlying_twisted(f.dst), comps)


def is_er_quasi_iso_dainf(f: DAInfMorphism, r: int) -> bool:
    from .spectral import is_er_quasi_iso
    return is_er_quasi_iso(underlying_twisted_morphism(f), r)


# ---------------------------------------------------------------------------
# twisted dgas: iterated products and tensor with a dA-infinity algebra
# ---------------------------------------------------------------------------

def unit_dga(field: Field) -> TwistedDga:
    mod = unit_module(field)
    m02 = BigradedMap(_pow(mod, 2), mod, (0, 0),
                      {(0, 0): Matrix.identity(field, 1)})
    return TwistedDga(mod, {(0, 2): m02})


def iterated_mu(dga: TwistedDga, n: int) -> BigradedMap:
    """mu_2 = m_{02}, mu_n = m_{02} o (mu_{n-1} (x) 1)."""
    if n < 2:
        raise ValueError("iterated product needs n >= 2")
    mu = dga.m_map(0, 2)
    for _ in range(3, n + 1):
        mu = bcompose(dga.m_map(0, 2), tensor_maps(mu, identity_map(dga.module)))
    return mu


def tensor_twisted_dga(dga: TwistedDga, a: DAInfAlgebra,
                       check: bool = True) -> DAInfAlgebra:
    """Lambda (x) A with mhat_{i1} = mu_{i1} (x) 1 + 1 (x) m_{i1} and
    mhat_{ij} = (mu_j (x) m_{ij}) o tau_j for j >= 2."""
    if dga.field != a.field:
        raise ValueError("field mismatch")
    mod = tensor_modules(dga.module, a.module)
    id_l = identity_map(dga.module)
    id_a = identity_map(a.module)
    m: dict[tuple[int, int], BigradedMap] = {}
    ones = sorted({i for (i, j) in dga.m if j == 1} |
                  {i for (i, j) in a.m if j == 1})
    for i in ones:
        t = zero_map(mod, mod, (-i, 1 - i))
        if (i, 1) in dga.m:
            t = t + tensor_maps(dga.m[(i, 1)], id_a)
        if (i, 1) in a.m:
            t = t + tensor_maps(id_l, a.m[(i, 1)])
        if not t.is_zero():
            m[(i, 1)] = t
    for (i, j), mij in sorted(a.m.items()):
        if j < 2:
            continue
        tau = interleave_iso(dga.module, a.module, j)
        mu_j = iterated_mu(dga, j)
        t = bcompose(tensor_maps(mu_j, mij), tau)
        if not t.is_zero():
            m[(i, j)] = t
    out = DAInfAlgebra(mod, m)
    if check:
        check_dainf(out).raise_if_failed()
    return out


def tensor_dga_morphism(dga: TwistedDga, f: DAInfMorphism,
                        src: DAInfAlgebra | None = None,
                        dst: DAInfAlgebra | None = None) -> DAInfMorphism:
    """1_Lambda (x) f on Lambda (x) -: fhat_{i1} = 1 (x) f_{i1},
    fhat_{ij} = (mu_j (x) f_{ij}) o tau_j."""
    src = src or tensor_twisted_dga(dga, f.src)
    dst = dst or tensor_twisted_dga(dga, f.dst)
    id_l = identity_map(dga.module)
    comps: dict[tuple[int, int], BigradedMap] = {}
    for (i, j), fij in sorted(f.f.items()):
        if j == 1:
            comps[(i, 1)] = tensor_maps(id_l, fij)
        else:
            tau = interleave_iso(dga.module, f.src.module, j)
            comps[(i, j)] = bcompose(tensor_maps(iterated_mu(dga, j), fij), tau)
    out = DAInfMorphism(src, dst, comps)
    check_dainf_morphism(out).raise_if_failed()
    return out


# ---------------------------------------------------------------------------
# Lambda_r and the functorial r-path
# ---------------------------------------------------------------------------

@dataclass
class LambdaObject:
    algebra: TwistedDga
    iota: DAInfMorphism       # R -> Lambda_r, 1 -> e_- + e_+
    p_minus: DAInfMorphism    # e_- -> 1, else 0
    p_plus: DAInfMorphism     # e_+ -> 1, else 0
    r: int


def lambda_r_dga(r: int, field: Field | None = None) -> LambdaObject:
    """Generators e_-, e_+ at (0,0) and u at (-r, 1-r);
    mu_{r1}(e_-) = -u, mu_{r1}(e_+) = u;
    mu_{02}: e_-e_- = e_-, e_+e_+ = e_+, e_-u = u = ue_+, 0 elsewhere."""
    from .linalg import GF
    field = field or GF()
    e_bid = (0, 0)
    u_bid = (-r, 1 - r)
    mod = BigradedModule(field, {e_bid: 2, u_bid: 1})
    m_r1 = BigradedMap(mod, mod, (-r, 1 - r),
                       {e_bid: Matrix.from_rows(field, [[-1, 1]])})

    def label(bid, idx):
        if bid == e_bid and idx == 0:
            return "e-"
        if bid == e_bid and idx == 1:
            return "e+"
        return "u"

    table = {("e-", "e-"): "e-", ("e+", "e+"): "e+",
             ("e-", "u"): "u", ("u", "e+"): "u"}
    pw2 = _pow(mod, 2)
    t2 = power_tree(mod, 2)
    back = {"e-": (e_bid, 0), "e+": (e_bid, 1), "u": (u_bid, 0)}
    blocks = {}
    for (i, j) in pw2.support():
        basis = tree_basis(t2, i, j)
        rows = {}
        for cc, (lf, rt) in enumerate(basis):
            prod = table.get((label(lf[:2], lf[2]), label(rt[:2], rt[2])))
            if prod is None:
                continue
            tb, tidx = back[prod]
            if (tb[0], tb[1]) != (i, j):
                raise AssertionError("product lands off its bidegree")
            rows[(tidx, cc)] = field.one()
        if rows:
            mat = Matrix.zero(field, mod.dim(i, j), len(basis))
            for (rr, cc), v in rows.items():
                mat[rr, cc] = v
            blocks[(i, j)] = mat
    m02 = BigradedMap(pw2, mod, (0, 0), blocks)
    lam = TwistedDga(mod, {(r, 1): m_r1, (0, 2): m02})
    check_dainf(lam).raise_if_failed()

    unit = unit_dga(field)
    iota01 = BigradedMap(unit.module, mod, (0, 0),
                         {(0, 0): Matrix.from_rows(field, [[1], [1]])})
    pm01 = BigradedMap(mod, unit.module, (0, 0),
                       {e_bid: Matrix.from_rows(field, [[1, 0]])})
    pp01 = BigradedMap(mod, unit.module, (0, 0),
                       {e_bid: Matrix.from_rows(field, [[0, 1]])})
    iota = DAInfMorphism(unit, lam, {(0, 1): iota01})
    p_minus = DAInfMorphism(lam, unit, {(0, 1): pm01})
    p_plus = DAInfMorphism(lam, unit, {(0, 1): pp01})
    for mor in (iota, p_minus, p_plus):
        check_dainf_morphism(mor).raise_if_failed()
    return LambdaObject(lam, iota, p_minus, p_plus, r)


def _unit_collapse(mod: BigradedModule) -> BigradedMap:
    """R (x) A -> A, the unit identification (identity matrices)."""
    src = tensor_modules(unit_module(mod.field), mod)
    return BigradedMap(src, mod, (0, 0),
                       {k: Matrix.identity(mod.field, n)
                        for k, n in mod.dims.items()})


@dataclass
class PathDainf:
    algebra: DAInfAlgebra          # on the direct-sum module x/y/z
    iota: DAInfMorphism
    p_minus: DAInfMorphism
    p_plus: DAInfMorphism
    p_zero: BigradedMap            # bidegree (r, r-1)
    tensor_algebra: DAInfAlgebra   # Lambda_r (x) A presentation
    ident: BigradedMap             # Lambda_r (x) A -> direct-sum module
    r: int


def lambda_ident_iso(lam_mod: BigradedModule, a_mod: BigradedModule,
                     path_mod: BigradedModule, r: int) -> BigradedMap:
    """Strict iso Lambda_r (x) A -> A (+) A[mid] (+) A matching
    e_- (x) x + u (x) y + e_+ (x) z <-> (x, y, z)."""
    from .bigraded import tensor_summands
    field = a_mod.field
    src = tensor_modules(lam_mod, a_mod)
    blocks = {}
    for (i, j) in src.support():
        n0 = a_mod.dim(i, j)
        n1 = a_mod.dim(i + r, j + r - 1)
        rows = path_mod.dim(i, j)
        cols = src.dim(i, j)
        mat = Matrix.zero(field, rows, cols)
        cc = 0
        for (p, q, dl, da) in tensor_summands(lam_mod, a_mod, i, j):
            for l_idx in range(dl):
                for a_idx in range(da):
                    if (p, q) == (0, 0) and l_idx == 0:
                        mat[a_idx, cc] = field.one()
                    elif (p, q) == (0, 0) and l_idx == 1:
                        mat[n0 + n1 + a_idx, cc] = field.one()
                    else:
                        mat[n0 + a_idx, cc] = field.one()
                    cc += 1
        if rows and cols:
            blocks[(i, j)] = mat
    return BigradedMap(src, path_mod, (0, 0), blocks)


def _path_tj(a_mod: BigradedModule, path_mod: BigradedModule, r: int,
             j: int) -> BigradedMap:
    """t_j: P_r(A)^{(x) j} -> P_r(A^{(x) j});
    only the patterns x..x, x..x y z..z, z..z survive, with the sign
    xbar = (-1)^{r x_1 + (1-r) x_2} on every x left of the y."""
    field = a_mod.field
    mid_shift = (-r, 1 - r)
    pw_a = _pow(a_mod, j)
    target, _, _ = direct_sum([pw_a, pw_a.shifted(mid_shift), pw_a])
    src = _pow(path_mod, j)
    ptree = power_tree(path_mod, j)
    atree = power_tree(a_mod, j)
    a_index: dict = {}

    def aidx(i, jj, tup):
        key = (i, jj)
        if key not in a_index:
            a_index[key] = {t: k for k, t in enumerate(tree_basis(atree, i, jj))}
        return a_index[key].get(tup)

    blocks = {}
    for (i, jj) in src.support():
        basis = tree_basis(ptree, i, jj)
        rows = target.dim(i, jj)
        if not rows:
            continue
        n_first = pw_a.dim(i, jj)
        n_mid = pw_a.dim(i + r, jj + r - 1)
        mat = Matrix.zero(field, rows, len(basis))
        nonzero = False
        for cc, items in enumerate(basis):
            # decode each slot into (part, A-bidegree, A-index)
            decoded = []
            for (bi, bj, idx) in items:
                n0 = a_mod.dim(bi, bj)
                n1 = a_mod.dim(bi + r, bj + r - 1)
                if idx < n0:
                    decoded.append(("x", (bi, bj), idx))
                elif idx < n0 + n1:
                    decoded.append(("y", (bi + r, bj + r - 1), idx - n0))
                else:
                    decoded.append(("z", (bi, bj), idx - n0 - n1))
            parts = [d[0] for d in decoded]
            if all(p == "x" for p in parts):
                tup = tuple((b[0], b[1], ix) for (_, b, ix) in decoded)
                rr = aidx(i, jj, tup)
                if rr is not None:
                    mat[rr, cc] = field.one()
                    nonzero = True
            if all(p == "z" for p in parts):
                tup = tuple((b[0], b[1], ix) for (_, b, ix) in decoded)
                rr = aidx(i, jj, tup)
                if rr is not None:
                    mat[n_first + n_mid + rr, cc] = field.add(
                        mat[n_first + n_mid + rr, cc], field.one())
                    nonzero = True
            ys = [s for s, p in enumerate(parts) if p == "y"]
            if len(ys) == 1:
                s0 = ys[0]
                if all(p == "x" for p in parts[:s0]) and \
                   all(p == "z" for p in parts[s0 + 1:]):
                    sgn = 0
                    for (_, b, _ix) in decoded[:s0]:
                        sgn += r * b[0] + (1 - r) * b[1]
                    tup = tuple((b[0], b[1], ix) for (_, b, ix) in decoded)
                    rr = aidx(i + r, jj + r - 1, tup)
                    if rr is not None:
                        v = field.one() if sgn % 2 == 0 else field.of_int(-1)
                        mat[n_first + rr, cc] = v
                        nonzero = True
        if nonzero:
            blocks[(i, jj)] = mat
    return BigradedMap(src, target, (0, 0), blocks)


def path_dainf(a: DAInfAlgebra, r: int) -> PathDainf:
    """Functorial r-path built twice: as Lambda_r (x) A transported through
    the identification, and directly from the printed block matrices;
    the two constructions are compared entry by entry."""
    lam = lambda_r_dga(r, a.field)
    tensor_alg = tensor_twisted_dga(lam.algebra, a)

    mid_shift = (-r, 1 - r)
    mid = a.module.shifted(mid_shift)
    path_mod, (inc0, inc1, inc2), (pr0, pr1, pr2) = \
        direct_sum([a.module, mid, a.module])
    ident = lambda_ident_iso(lam.algebra.module, a.module, path_mod, r)
    ident_inv = _invert_strict_iso(ident)

    # transported structure maps
    transported: dict[tuple[int, int], BigradedMap] = {}
    for (i, j), mij in sorted(tensor_alg.m.items()):
        pre = nary_tensor_maps([ident_inv] * j) if j > 1 else ident_inv
        transported[(i, j)] = bcompose(ident, bcompose(mij, pre))

    # direct construction: arity 1 is the twisted path, arity >= 2 the
    # diagonal matrices composed with t_j
    direct: dict[tuple[int, int], BigradedMap] = {}
    into_mid = shift_into(a.module, mid_shift)
    ones = sorted({i for (i, j) in a.m if j == 1} | {r})
    for i in ones:
        dm = zero_map(path_mod, path_mod, (-i, 1 - i))
        if (i, 1) in a.m:
            da = a.m[(i, 1)]
            middle = da.shifted(mid_shift)
            if (i + r + 1) % 2:
                middle = -middle
            dm = dm + bcompose(inc0, bcompose(da, pr0)) \
                    + bcompose(inc1, bcompose(middle, pr1)) \
                    + bcompose(inc2, bcompose(da, pr2))
        if i == r:
            dm = dm - bcompose(inc1, bcompose(into_mid, pr0))
            dm = dm + bcompose(inc1, bcompose(into_mid, pr2))
        if not dm.is_zero():
            direct[(i, 1)] = dm
    for (i, j), mij in sorted(a.m.items()):
        if j < 2:
            continue
        tj = _path_tj(a.module, path_mod, r, j)
        pw_a = _pow(a.module, j)
        mid_pw = pw_a.shifted(mid_shift)
        _, (jnc0, jnc1, jnc2), (jpr0, jpr1, jpr2) = \
            direct_sum([pw_a, mid_pw, pw_a])
        middle = mij.shifted(mid_shift)
        if (r * j + i + j) % 2:
            middle = -middle
        block = bcompose(inc0, bcompose(mij, jpr0)) \
            + bcompose(inc1, bcompose(middle, jpr1)) \
            + bcompose(inc2, bcompose(mij, jpr2))
        direct[(i, j)] = bcompose(block, tj)

    keys = sorted(set(transported) | set(direct))
    for key in keys:
        i, j = key
        t = transported.get(key, zero_map(_pow(path_mod, j), path_mod,
                                          (-i, 2 - i - j)))
        d = direct.get(key, zero_map(_pow(path_mod, j), path_mod,
                                     (-i, 2 - i - j)))
        if t != d:
            raise AssertionError(
                f"path constructions disagree at m_{key}: tensor route vs "
                f"printed block matrices")

    algebra = DAInfAlgebra(path_mod, direct)
    check_dainf(algebra).raise_if_failed()
    iota = DAInfMorphism(a, algebra, {(0, 1): inc0 + inc2})
    p_minus = DAInfMorphism(algebra, a, {(0, 1): pr0})
    p_plus = DAInfMorphism(algebra, a, {(0, 1): pr2})
    for mor in (iota, p_minus, p_plus):
        check_dainf_morphism(mor).raise_if_failed()
    p_zero = bcompose(shift_out(a.module, mid_shift), pr1)
    return PathDainf(algebra, iota, p_minus, p_plus, p_zero,
                     tensor_alg, ident, r)


def _invert_strict_iso(f: BigradedMap) -> BigradedMap:
    blocks = {}
    p, q = f.bidegree
    if (p, q) != (0, 0):
        raise ValueError("only bidegree (0,0) isos are inverted here")
    for (i, j), blk in f.blocks.items():
        inv = blk.inverse()
        if inv is None:
            raise ValueError("not blockwise invertible")
        blocks[(i, j)] = inv
    return BigradedMap(f.dst, f.src, (0, 0), blocks)


def path_dainf_morphism(f: DAInfMorphism, r: int,
                        src_path: PathDainf | None = None,
                        dst_path: PathDainf | None = None) -> DAInfMorphism:
    """P_r(f)_{ij} = (f_{ij}, (-1)^{(r+1)(j-1)+i} f_{ij}, f_{ij}) o t_j."""
    pa = src_path or path_dainf(f.src, r)
    pb = dst_path or path_dainf(f.dst, r)
    mid_shift = (-r, 1 - r)
    comps = {}
    _, (binc0, binc1, binc2), _ = direct_sum(
        [f.dst.module, f.dst.module.shifted(mid_shift), f.dst.module])
    for (i, j), fij in sorted(f.f.items()):
        tj = _path_tj(f.src.module, pa.algebra.module, r, j)
        pw_a = _pow(f.src.module, j)
        mid_pw = pw_a.shifted(mid_shift)
        _, _, (jpr0, jpr1, jpr2) = direct_sum([pw_a, mid_pw, pw_a])
        middle = fij.shifted(mid_shift)
        if ((r + 1) * (j - 1) + i) % 2:
            middle = -middle
        block = bcompose(binc0, bcompose(fij, jpr0)) \
            + bcompose(binc1, bcompose(middle, jpr1)) \
            + bcompose(binc2, bcompose(fij, jpr2))
        comps[(i, j)] = bcompose(block, tj)
    out = DAInfMorphism(pa.algebra, pb.algebra, comps)
    check_dainf_morphism(out).raise_if_failed()
    return out


def diagonal_delta(r: int, field: Field | None = None):
    """The strict comultiplication Delta: Lambda_r -> Lambda_r (x) Lambda_r
    with Delta(e_-) = e_- (x) (e_- + e_+) + e_+ (x) e_-,
    Delta(e_+) = e_+ (x) e_+, Delta(u) = u (x) e_+ + e_+ (x) u.

    Returns (delta, lam, square) where square = Lambda_r (x) Lambda_r."""
    from .linalg import GF
    field = field or GF()
    lam = lambda_r_dga(r, field)
    square = tensor_twisted_dga(lam.algebra, lam.algebra)
    mod = lam.algebra.module
    e_bid, u_bid = (0, 0), (-r, 1 - r)
    labels = {("e-",): (e_bid, 0), ("e+",): (e_bid, 1), ("u",): (u_bid, 0)}

    def pair_index(i, j, la, lb):
        from .bigraded import tensor_summands
        (pa, qa), ia = labels[(la,)]
        (pb, qb), ib = labels[(lb,)]
        if (pa + pb, qa + qb) != (i, j):
            return None
        off = 0
        for (p, q, dl, da) in tensor_summands(mod, mod, i, j):
            if (p, q) == (pa, qa):
                return off + ia * da + ib
            off += dl * da
        return None

    images = {"e-": [("e-", "e-", 1), ("e-", "e+", 1), ("e+", "e-", 1)],
              "e+": [("e+", "e+", 1)],
              "u": [("u", "e+", 1), ("e+", "u", 1)]}
    blocks: dict = {}
    src_labels = {e_bid: ["e-", "e+"], u_bid: ["u"]}
    sq_mod = square.module
    for bid, labs in src_labels.items():
        mat = Matrix.zero(field, sq_mod.dim(*bid), len(labs))
        for cc, lab in enumerate(labs):
            for (la, lb, coef) in images[lab]:
                rr = pair_index(bid[0], bid[1], la, lb)
                if rr is None:
                    raise AssertionError("diagonal image off its bidegree")
                mat[rr, cc] = field.add(mat[rr, cc], field.of_int(coef))
        blocks[bid] = mat
    d01 = BigradedMap(mod, sq_mod, (0, 0), blocks)
    delta = DAInfMorphism(lam.algebra, square, {(0, 1): d01})
    check_dainf_morphism(delta).raise_if_failed()
    return delta, lam, square


def collapse_after(delta: DAInfMorphism, lam: LambdaObject, side: str) \
        -> DAInfMorphism:
    """(p^{side} (x) 1) o Delta as a strict morphism Lambda_r -> Lambda_r."""
    proj = lam.p_plus if side == "+" else lam.p_minus
    mod = lam.algebra.module
    field = mod.field
    p01 = proj.f_map(0, 1)
    coll = _unit_collapse(mod)
    mixed = bcompose(coll, tensor_maps(p01, identity_map(mod)))
    mor = DAInfMorphism(delta.dst, lam.algebra, {(0, 1): mixed})
    check_dainf_morphism(mor).raise_if_failed()
    return compose_dainf(mor, delta)


# ---------------------------------------------------------------------------
# r-homotopies for dA-infinity morphisms
# ---------------------------------------------------------------------------

def assemble_into_path_dainf(h: DAInfHomotopy,
                             dst_path: PathDainf | None = None) -> DAInfMorphism:
    """Candidate morphism A -> P_r(B) with components (f_{ik}, h_{ik}, g_{ik})."""
    r = h.r
    pb = dst_path or path_dainf(h.dst, r)
    mid_shift = (-r, 1 - r)
    _, (inc0, inc1, inc2), _ = direct_sum(
        [h.dst.module, h.dst.module.shifted(mid_shift), h.dst.module])
    into_mid = shift_into(h.dst.module, mid_shift)
    keys = sorted(set(h.f.f) | set(h.g.f) | set(h.h))
    comps = {}
    for (i, k) in keys:
        c = bcompose(inc0, h.f.f_map(i, k)) + bcompose(inc2, h.g.f_map(i, k))
        if (i, k) in h.h:
            c = c + bcompose(inc1, bcompose(into_mid, h.h[(i, k)]))
        if not c.is_zero():
            comps[(i, k)] = c
    return DAInfMorphism(h.src, pb.algebra, comps)


def _hmk_buckets(h: DAInfHomotopy) -> dict:
    """Left side of (H_mk) minus right side, bucketed by (m, k)."""
    a, b, r = h.src, h.dst, h.r
    field = a.field
    gk = sorted(h.g.f)
    fk = sorted(h.f.f)
    hk = sorted(h.h)
    buckets: dict[tuple[int, int], BigradedMap] = {}

    def bucket(m, k):
        if (m, k) not in buckets:
            buckets[(m, k)] = zero_map(_pow(a.module, k), b.module,
                                       (r - m, r - m + 1 - k))
        return (m, k)

    # sum 1: m^B_{il} applied to g .. g h f .. f
    for (i, l) in sorted(b.m):
        mil = b.m[(i, l)]
        for s in range(l):
            slot_choices = [gk] * s + [hk] + [fk] * (l - s - 1)
            for parts in iproduct(*slot_choices):
                p = sum(pp for (pp, _) in parts)
                k = sum(qq for (_, qq) in parts)
                m = i + p
                comps = ([h.g.f[pt] for pt in parts[:s]]
                         + [h.h[parts[s]]]
                         + [h.f.f[pt] for pt in parts[s + 1:]])
                tens = component_tensor(comps, [q for (_, q) in parts],
                                        a.module)
                term = bcompose(mil, tens)
                sgn = homotopy_sum1_sign(r, p, s, list(parts))
                if (m - r) % 2:
                    sgn += 1
                if sgn % 2:
                    term = -term
                key = bucket(m, k)
                buckets[key] = buckets[key] + term
    # sum 2: h_{il} applied to 1^s (x) m^A_{pq} (x) 1^t
    for (i, l) in hk:
        hil = h.h[(i, l)]
        for (p, q) in sorted(a.m):
            mpq = a.m[(p, q)]
            for s in range(l):
                t = l - 1 - s
                k = s + q + t
                m = i + p
                term = bcompose(hil, hom_one_map_one(mpq, a.module, s, t, q))
                sgn = homotopy_beta(r, s, q, t, p, l)
                if (m - r) % 2:
                    sgn += 1
                if sgn % 2:
                    term = -term
                key = bucket(m, k)
                buckets[key] = buckets[key] + term
    # right side
    for (i, k) in sorted(set(fk) | set(gk)):
        key = bucket(i + r, k)
        diff = h.g.f_map(i, k) - h.f.f_map(i, k)
        buckets[key] = buckets[key] - diff
    return buckets


def check_r_homotopy_dainf(h: DAInfHomotopy) -> Report:
    """(H_mk) evaluated directly, cross-checked against the assembled
    morphism into the r-path of the target."""
    rep = Report(f"dA-infinity {h.r}-homotopy conditions (H_mk)")
    fr = check_dainf_morphism(h.f)
    gr = check_dainf_morphism(h.g)
    if not fr.ok or not gr.ok:
        rep.fail("inputs", "f or g is not a morphism")
        return rep
    for (m, k), acc in sorted(_hmk_buckets(h).items()):
        rep.tick()
        for loc in sorted(acc.blocks):
            rep.fail((m, k) + loc, f"(H_{{{m}{k}}}) fails on the block at {loc}")
    assembled = check_dainf_morphism(assemble_into_path_dainf(h))
    if assembled.ok != rep.ok:
        raise AssertionError(
            "dA-infinity homotopy checker disagreement: (H_mk) route says "
            f"{rep.ok}, assembled-path route says {assembled.ok}")
    return rep
