"""Twisted complexes (multicomplexes) and their homotopy theory.

A twisted complex is a bigraded module with maps d_m of bidegree
(-m, -m+1) satisfying, for every m,

    sum_{i+j=m} (-1)^i d_i d_j = 0.                              (A_m)

Morphisms carry families f_m of bidegree (-m, -m) with

    sum_{i+j=m} d_i^B f_j = sum_{i+j=m} (-1)^i f_i d_j^A,       (B_m)

and an r-homotopy between f and g is a family hhat_m of bidegree
(-m+r, -m+r-1) with

    sum_{i+j=m} (-1)^{i+r} d_i^B hhat_j + (-1)^i hhat_i d_j^A
        = 0 (m < r),  g_{m-r} - f_{m-r} (m >= r).               (H_m)

The homotopy checker computes (H_m) directly and also assembles the
candidate map x -> (f x, hhat x, g x) into the r-path of the target and
runs the morphism checker on it; the two verdicts must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bigraded import (
    BigradedMap, BigradedModule, compose as bcompose, direct_sum, identity_map,
    shift_into, shift_out, tensor_maps, tensor_modules, unit_module, zero_map,
)
from .linalg import BlockLinearSystem
from .reports import Report


class TwistedComplex:
    """Bigraded module with a finitely supported family of twisting maps."""

    __slots__ = ("module", "d")

    def __init__(self, module: BigradedModule, d: dict[int, BigradedMap] | None = None):
        self.module = module
        self.d = {}
        for m, dm in (d or {}).items():
            if m < 0:
                raise ValueError("negative twisting index")
            if dm.src != module or dm.dst != module:
                raise ValueError(f"d_{m} is not an endomorphism of the module")
            if dm.bidegree != (-m, -m + 1):
                raise ValueError(f"d_{m} has bidegree {dm.bidegree}, "
                                 f"expected {(-m, -m + 1)}")
            if not dm.is_zero():
                self.d[m] = dm

    @property
    def field(self):
        return self.module.field

    def d_map(self, m: int) -> BigradedMap:
        dm = self.d.get(m)
        if dm is None:
            dm = zero_map(self.module, self.module, (-m, -m + 1))
        return dm

    def __eq__(self, other):
        if not isinstance(other, TwistedComplex):
            return NotImplemented
        if self.module != other.module:
            return False
        keys = set(self.d) | set(other.d)
        return all(self.d_map(m) == other.d_map(m) for m in keys)

    def __repr__(self):
        return f"TwistedComplex(dims={dict(sorted(self.module.dims.items()))}, " \
               f"d_support={sorted(self.d)})"


class TwistedMorphism:
    __slots__ = ("src", "dst", "f")

    def __init__(self, src: TwistedComplex, dst: TwistedComplex,
                 f: dict[int, BigradedMap] | None = None):
        self.src = src
        self.dst = dst
        self.f = {}
        for m, fm in (f or {}).items():
            if m < 0:
                raise ValueError("negative morphism index")
            if fm.src != src.module or fm.dst != dst.module:
                raise ValueError(f"f_{m} modules do not match src/dst")
            if fm.bidegree != (-m, -m):
                raise ValueError(f"f_{m} has bidegree {fm.bidegree}, "
                                 f"expected {(-m, -m)}")
            if not fm.is_zero():
                self.f[m] = fm

    @property
    def field(self):
        return self.src.field

    def f_map(self, m: int) -> BigradedMap:
        fm = self.f.get(m)
        if fm is None:
            fm = zero_map(self.src.module, self.dst.module, (-m, -m))
        return fm

    def is_strict(self) -> bool:
        return all(m == 0 for m in self.f)

    def __eq__(self, other):
        if not isinstance(other, TwistedMorphism):
            return NotImplemented
        if self.src != other.src or self.dst != other.dst:
            return False
        keys = set(self.f) | set(other.f)
        return all(self.f_map(m) == other.f_map(m) for m in keys)

    def __add__(self, other):
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("morphism mismatch")
        keys = set(self.f) | set(other.f)
        return TwistedMorphism(self.src, self.dst,
                               {m: self.f_map(m) + other.f_map(m) for m in keys})

    def __sub__(self, other):
        if self.src != other.src or self.dst != other.dst:
            raise ValueError("morphism mismatch")
        keys = set(self.f) | set(other.f)
        return TwistedMorphism(self.src, self.dst,
                               {m: self.f_map(m) - other.f_map(m) for m in keys})

    def __repr__(self):
        return f"TwistedMorphism(support={sorted(self.f)})"


class RHomotopy:
    """Witness for f ~_r g: family hhat_m of bidegree (-m+r, -m+r-1)."""

    __slots__ = ("r", "f", "g", "h")

    def __init__(self, r: int, f: TwistedMorphism, g: TwistedMorphism,
                 h: dict[int, BigradedMap] | None = None):
        if r < 0:
            raise ValueError("r must be non-negative")
        if f.src != g.src or f.dst != g.dst:
            raise ValueError("f and g must share source and target")
        self.r = r
        self.f = f
        self.g = g
        self.h = {}
        for m, hm in (h or {}).items():
            if m < 0:
                raise ValueError("negative homotopy index")
            if hm.src != f.src.module or hm.dst != f.dst.module:
                raise ValueError(f"hhat_{m} modules do not match")
            if hm.bidegree != (-m + r, -m + r - 1):
                raise ValueError(f"hhat_{m} has bidegree {hm.bidegree}, "
                                 f"expected {(-m + r, -m + r - 1)}")
            if not hm.is_zero():
                self.h[m] = hm

    @property
    def src(self):
        return self.f.src

    @property
    def dst(self):
        return self.f.dst

    def h_map(self, m: int) -> BigradedMap:
        hm = self.h.get(m)
        if hm is None:
            hm = zero_map(self.src.module, self.dst.module,
                          (-m + self.r, -m + self.r - 1))
        return hm


def identity_morphism(a: TwistedComplex) -> TwistedMorphism:
    return TwistedMorphism(a, a, {0: identity_map(a.module)})


def zero_morphism(a: TwistedComplex, b: TwistedComplex) -> TwistedMorphism:
    return TwistedMorphism(a, b, {})


def unit_complex(field) -> TwistedComplex:
    return TwistedComplex(unit_module(field), {})


# ---------------------------------------------------------------------------
# axiom checkers
# ---------------------------------------------------------------------------

def check_twisted(a: TwistedComplex) -> Report:
    rep = Report("twisted complex axioms (A_m)")
    keys = sorted(a.d)
    ms = sorted({i + j for i in keys for j in keys})
    for m in ms:
        acc = zero_map(a.module, a.module, (-m, -m + 2))
        for i in keys:
            j = m - i
            if j in a.d:
                term = bcompose(a.d[i], a.d[j])
                acc = acc + (term if i % 2 == 0 else -term)
        rep.tick()
        for loc in sorted(acc.blocks):
            rep.fail((m,) + loc, f"(A_{m}) fails on the block at {loc}")
    return rep


def check_morphism(f: TwistedMorphism) -> Report:
    rep = Report("twisted morphism conditions (B_m)")
    dk_a = sorted(f.src.d)
    dk_b = sorted(f.dst.d)
    fk = sorted(f.f)
    ms = sorted({i + j for i in dk_b for j in fk} | {i + j for i in fk for j in dk_a})
    for m in ms:
        acc = zero_map(f.src.module, f.dst.module, (-m, -m + 1))
        for i in dk_b:
            j = m - i
            if j in f.f:
                acc = acc + bcompose(f.dst.d[i], f.f[j])
        for i in fk:
            j = m - i
            if j in f.src.d:
                term = bcompose(f.f[i], f.src.d[j])
                acc = acc - (term if i % 2 == 0 else -term)
        rep.tick()
        for loc in sorted(acc.blocks):
            rep.fail((m,) + loc, f"(B_{m}) fails on the block at {loc}")
    return rep


# ---------------------------------------------------------------------------
# category structure
# ---------------------------------------------------------------------------

def compose(g: TwistedMorphism, f: TwistedMorphism,
            check: bool = True) -> TwistedMorphism:
    """g after f, (g o f)_m = sum_{i+j=m} g_i f_j."""
    if f.dst != g.src:
        raise ValueError("source/target mismatch in composition")
    comps: dict[int, BigradedMap] = {}
    for i, gi in g.f.items():
        for j, fj in f.f.items():
            m = i + j
            term = bcompose(gi, fj)
            comps[m] = comps[m] + term if m in comps else term
    out = TwistedMorphism(f.src, g.dst, comps)
    if check:
        check_morphism(out).raise_if_failed()
    return out


def invert(f: TwistedMorphism) -> TwistedMorphism | None:
    """Two-sided inverse, or None when some block of f_0 is not invertible."""
    a, b = f.src, f.dst
    if a.module.dims.keys() != b.module.dims.keys():
        return None
    f0 = f.f_map(0)
    inv_blocks = {}
    for (i, j), n in b.module.dims.items():
        if a.module.dim(i, j) != n:
            return None
        blk = f0.block(i, j).inverse()
        if blk is None:
            return None
        inv_blocks[(i, j)] = blk
    g0 = BigradedMap(b.module, a.module, (0, 0), inv_blocks)
    g = {0: g0}
    # g_m = -f_0^{-1} (sum_{i+j=m, i>0} f_i g_j), a triangular recursion;
    # g_m can only be nonzero where a bidegree-(-m,-m) map B -> A exists
    max_m = max(((ib - ia) for (ib, jb) in b.module.dims
                 for (ia, ja) in a.module.dims
                 if ib - ia == jb - ja and ib - ia > 0), default=0)
    for m in range(1, max_m + 1):
        acc = zero_map(b.module, a.module, (-m, -m))
        for i, fi in f.f.items():
            if i == 0:
                continue
            j = m - i
            if j in g:
                acc = acc + bcompose(fi, g[j])
        gm = -bcompose(g0, acc)
        if not gm.is_zero():
            g[m] = gm
    ginv = TwistedMorphism(b, a, g)
    if compose(ginv, f, check=False) != identity_morphism(a) or \
       compose(f, ginv, check=False) != identity_morphism(b):
        raise AssertionError("triangular inversion failed to produce an inverse")
    check_morphism(ginv).raise_if_failed()
    return ginv


# ---------------------------------------------------------------------------
# monoidal structure and internal hom
# ---------------------------------------------------------------------------

def tensor(a: TwistedComplex, b: TwistedComplex) -> TwistedComplex:
    """(A (x) B, d_m^A (x) 1 + 1 (x) d_m^B)."""
    if a.field != b.field:
        raise ValueError("field mismatch")
    mod = tensor_modules(a.module, b.module)
    ida, idb = identity_map(a.module), identity_map(b.module)
    d: dict[int, BigradedMap] = {}
    for m in sorted(set(a.d) | set(b.d)):
        dm = zero_map(mod, mod, (-m, -m + 1))
        if m in a.d:
            dm = dm + tensor_maps(a.d[m], idb)
        if m in b.d:
            dm = dm + tensor_maps(ida, b.d[m])
        if not dm.is_zero():
            d[m] = dm
    out = TwistedComplex(mod, d)
    check_twisted(out).raise_if_failed()
    return out


def tensor_morphisms(f: TwistedMorphism, g: TwistedMorphism) -> TwistedMorphism:
    """(f (x) g)_m = sum_{i+j=m} f_i (x) g_j."""
    src = tensor(f.src, g.src)
    dst = tensor(f.dst, g.dst)
    comps: dict[int, BigradedMap] = {}
    for i, fi in f.f.items():
        for j, gj in g.f.items():
            m = i + j
            term = tensor_maps(fi, gj)
            comps[m] = comps[m] + term if m in comps else term
    out = TwistedMorphism(src, dst, comps)
    check_morphism(out).raise_if_failed()
    return out


def internal_hom(a: TwistedComplex, b: TwistedComplex) -> TwistedComplex:
    """[A,B] with (d_i f) = (-1)^{i(u+v)} d_i^B f - (-1)^v f d_i^A.

    The (u,v) piece is the space of bigraded maps of bidegree (u,v),
    truncated to the finite window spanned by the supports.
    """
    field = a.field
    hom_dims: dict[tuple[int, int], int] = {}
    for (i, j), n in a.module.dims.items():
        for (i2, j2), n2 in b.module.dims.items():
            k = (i2 - i, j2 - j)
            hom_dims[k] = hom_dims.get(k, 0) + n * n2
    mod = BigradedModule(field, hom_dims)

    def basis_enum(u, v):
        """Elementary maps at (u,v): (src bidegree, src index, dst index)."""
        out = []
        for (i, j) in a.module.support():
            nb = b.module.dim(i + u, j + v)
            if nb:
                for sa in range(a.module.dims[(i, j)]):
                    for tb in range(nb):
                        out.append(((i, j), sa, tb))
        return out

    enums = {uv: basis_enum(*uv) for uv in mod.support()}
    index = {uv: {e: k for k, e in enumerate(enums[uv])} for uv in enums}

    from .linalg import Matrix

    d: dict[int, BigradedMap] = {}
    for m in sorted(set(a.d) | set(b.d)):
        blocks = {}
        for (u, v) in mod.support():
            tgt = (u - m, v - m + 1)
            rows = mod.dim(*tgt)
            cols = mod.dim(u, v)
            if not rows or not cols:
                continue
            mat = Matrix.zero(field, rows, cols)
            nonzero = False
            s1 = -1 if (m * (u + v)) % 2 else 1
            s2 = -1 if v % 2 else 1
            dmb = b.d.get(m)
            dma = a.d.get(m)
            for cidx, ((i, j), sa, tb) in enumerate(enums[(u, v)]):
                # d_m^B o E: lands in elementary maps with source (i,j)
                if dmb is not None:
                    blk = dmb.blocks.get((i + u, j + v))
                    if blk is not None:
                        for tb2 in range(blk.rows):
                            val = blk[tb2, tb]
                            if val:
                                ridx = index[tgt].get(((i, j), sa, tb2))
                                if ridx is not None:
                                    add = val if s1 > 0 else field.neg(val)
                                    mat[ridx, cidx] = field.add(mat[ridx, cidx], add)
                                    nonzero = True
                # E o d_m^A: sources (i', j') with (i'-m, j'-m+1) = (i, j)
                if dma is not None:
                    i2, j2 = i + m, j + m - 1
                    blk = dma.blocks.get((i2, j2))
                    if blk is not None:
                        for sa2 in range(blk.cols):
                            val = blk[sa, sa2]
                            if val:
                                ridx = index[tgt].get(((i2, j2), sa2, tb))
                                if ridx is not None:
                                    sub = val if s2 > 0 else field.neg(val)
                                    mat[ridx, cidx] = field.sub(mat[ridx, cidx], sub)
                                    nonzero = True
            if nonzero:
                blocks[(u, v)] = mat
        dm = BigradedMap(mod, mod, (-m, -m + 1), blocks)
        if not dm.is_zero():
            d[m] = dm
    out = TwistedComplex(mod, d)
    check_twisted(out).raise_if_failed()
    return out


# ---------------------------------------------------------------------------
# paths, translations, cones
# ---------------------------------------------------------------------------

@dataclass
class PathObject:
    complex: TwistedComplex
    iota: TwistedMorphism          # A -> P_r(A), x -> (x, 0, x)
    p_minus: TwistedMorphism       # (x,y,z) -> x
    p_plus: TwistedMorphism        # (x,y,z) -> z
    p_zero: BigradedMap            # (x,y,z) -> y, bidegree (r, r-1)
    r: int


def path(a: TwistedComplex, r: int) -> PathObject:
    """The r-path P_r(A)_i^j = A_i^j (+) A_{i+r}^{j+r-1} (+) A_i^j."""
    mid_shift = (-r, 1 - r)
    mid = a.module.shifted(mid_shift)
    total, (inc0, inc1, inc2), (pr0, pr1, pr2) = direct_sum([a.module, mid, a.module])
    into_mid = shift_into(a.module, mid_shift)   # A -> mid, bidegree (-r, 1-r)
    out_mid = shift_out(a.module, mid_shift)     # mid -> A, bidegree (r, r-1)

    d: dict[int, BigradedMap] = {}
    ms = sorted(set(a.d) | {r})
    for m in ms:
        dm = zero_map(total, total, (-m, -m + 1))
        if m in a.d:
            da = a.d[m]
            # middle block sign (-1)^{m+r+1}; at m = r this is the -d_r entry
            middle = da.shifted(mid_shift)
            if (m + r + 1) % 2:
                middle = -middle
            dm = dm + bcompose(inc0, bcompose(da, pr0)) \
                    + bcompose(inc1, bcompose(middle, pr1)) \
                    + bcompose(inc2, bcompose(da, pr2))
        if m == r:
            dm = dm - bcompose(inc1, bcompose(into_mid, pr0))
            dm = dm + bcompose(inc1, bcompose(into_mid, pr2))
        if not dm.is_zero():
            d[m] = dm
    p = TwistedComplex(total, d)
    check_twisted(p).raise_if_failed()

    iota = TwistedMorphism(a, p, {0: inc0 + inc2})
    p_minus = TwistedMorphism(p, a, {0: pr0})
    p_plus = TwistedMorphism(p, a, {0: pr2})
    for mor in (iota, p_minus, p_plus):
        check_morphism(mor).raise_if_failed()
    p_zero = bcompose(out_mid, pr1)
    return PathObject(p, iota, p_minus, p_plus, p_zero, r)


def path_morphism(f: TwistedMorphism, r: int,
                  src_path: PathObject | None = None,
                  dst_path: PathObject | None = None) -> TwistedMorphism:
    """P_r(f)_m = (f_m, (-1)^m f_m, f_m)."""
    pa = src_path or path(f.src, r)
    pb = dst_path or path(f.dst, r)
    mid_shift = (-r, 1 - r)
    _, (ainc0, ainc1, ainc2), (apr0, apr1, apr2) = direct_sum(
        [f.src.module, f.src.module.shifted(mid_shift), f.src.module])
    _, (binc0, binc1, binc2), _ = direct_sum(
        [f.dst.module, f.dst.module.shifted(mid_shift), f.dst.module])
    comps = {}
    for m, fm in f.f.items():
        middle = fm.shifted(mid_shift)
        if m % 2:
            middle = -middle
        comps[m] = bcompose(binc0, bcompose(fm, apr0)) \
            + bcompose(binc1, bcompose(middle, apr1)) \
            + bcompose(binc2, bcompose(fm, apr2))
    out = TwistedMorphism(pa.complex, pb.complex, comps)
    check_morphism(out).raise_if_failed()
    return out


def translation(a: TwistedComplex, r: int) -> TwistedComplex:
    """T_r(A)_i^j = A_{i-r}^{j-r+1} with T_r(d_m) = (-1)^{m+r+1} d_m."""
    shift = (r, r - 1)
    mod = a.module.shifted(shift)
    d = {}
    for m, dm in a.d.items():
        t = dm.shifted(shift)
        if (m + r + 1) % 2:
            t = -t
        d[m] = t
    out = TwistedComplex(mod, d)
    check_twisted(out).raise_if_failed()
    return out


@dataclass
class ConeObject:
    complex: TwistedComplex
    inclusion: TwistedMorphism    # B -> C_r(f)
    projection: TwistedMorphism   # C_r(f) -> T_r(A)
    w: TwistedMorphism            # the morphism the cone was built from
    r: int


def cone(f: TwistedMorphism, r: int) -> ConeObject:
    """C_r(f)_i^j = A_{i-r}^{j-r+1} (+) B_i^j with
    D_m(a,b) = ((-1)^{m+r+1} d_m a, (-1)^{m+r+1} f_{m-r}(a) + d_m b)."""
    a, b = f.src, f.dst
    shift = (r, r - 1)
    ta = a.module.shifted(shift)
    total, (inc_a, inc_b), (pr_a, pr_b) = direct_sum([ta, b.module])
    out_shift = shift_out(a.module, shift)  # T_r(A) -> A, bidegree (-r, 1-r)

    d: dict[int, BigradedMap] = {}
    ms = sorted(set(a.d) | set(b.d) | {m + r for m in f.f})
    for m in ms:
        dm = zero_map(total, total, (-m, -m + 1))
        sgn = 1 if (m + r + 1) % 2 == 0 else -1
        if m in a.d:
            t = a.d[m].shifted(shift)
            dm = dm + bcompose(inc_a, bcompose(t if sgn > 0 else -t, pr_a))
        if m in b.d:
            dm = dm + bcompose(inc_b, bcompose(b.d[m], pr_b))
        if m - r in f.f:  # convention f_{<0} = 0
            cross = bcompose(f.f[m - r], out_shift)  # T_r(A) -> B
            dm = dm + bcompose(inc_b, bcompose(cross if sgn > 0 else -cross, pr_a))
        if not dm.is_zero():
            d[m] = dm
    c = TwistedComplex(total, d)
    check_twisted(c).raise_if_failed()
    t_a = translation(a, r)
    inclusion = TwistedMorphism(b, c, {0: inc_b})
    projection = TwistedMorphism(c, t_a, {0: pr_a})
    check_morphism(inclusion).raise_if_failed()
    check_morphism(projection).raise_if_failed()
    return ConeObject(c, inclusion, projection, f, r)


# ---------------------------------------------------------------------------
# r-homotopies
# ---------------------------------------------------------------------------

def _homotopy_lhs(h: RHomotopy, m: int) -> BigradedMap:
    """sum_{i+j=m} (-1)^{i+r} d_i^B hhat_j + (-1)^i hhat_i d_j^A."""
    a, b, r = h.src, h.dst, h.r
    acc = zero_map(a.module, b.module, (-m + r, -m + r))
    for i, di in b.d.items():
        j = m - i
        if j in h.h:
            term = bcompose(di, h.h[j])
            acc = acc + (term if (i + r) % 2 == 0 else -term)
    for i, hi in h.h.items():
        j = m - i
        if j in a.d:
            term = bcompose(hi, a.d[j])
            acc = acc + (term if i % 2 == 0 else -term)
    return acc


def assemble_into_path(h: RHomotopy, dst_path: PathObject | None = None) \
        -> TwistedMorphism:
    """The candidate morphism A -> P_r(B) with components (f_m, hhat_m, g_m)."""
    r = h.r
    pb = dst_path or path(h.dst, r)
    mid_shift = (-r, 1 - r)
    _, (inc0, inc1, inc2), _ = direct_sum(
        [h.dst.module, h.dst.module.shifted(mid_shift), h.dst.module])
    into_mid = shift_into(h.dst.module, mid_shift)
    ms = sorted(set(h.f.f) | set(h.g.f) | set(h.h))
    comps = {}
    for m in ms:
        c = bcompose(inc0, h.f.f_map(m)) + bcompose(inc2, h.g.f_map(m))
        if m in h.h:
            c = c + bcompose(inc1, bcompose(into_mid, h.h[m]))
        comps[m] = c
    return TwistedMorphism(h.src, pb.complex, comps)


def check_r_homotopy(h: RHomotopy) -> Report:
    """Verify (H_m) for all m, cross-checked against the assembled map into P_r."""
    rep = Report(f"{h.r}-homotopy conditions (H_m)")
    fr = check_morphism(h.f)
    gr = check_morphism(h.g)
    if not fr.ok or not gr.ok:
        rep.fail("inputs", "f or g is not a morphism of twisted complexes")
        return rep
    r = h.r
    ms = set()
    for i in h.dst.d:
        for j in h.h:
            ms.add(i + j)
    for i in h.h:
        for j in h.src.d:
            ms.add(i + j)
    ms |= {m + r for m in set(h.f.f) | set(h.g.f)}
    for m in sorted(ms):
        lhs = _homotopy_lhs(h, m)
        if m >= r:
            lhs = lhs - (h.g.f_map(m - r) - h.f.f_map(m - r))
        rep.tick()
        for loc in sorted(lhs.blocks):
            rep.fail((m,) + loc, f"(H_{m}) fails on the block at {loc}")
    # independent route: the assembled map must be a morphism into P_r(dst)
    assembled = check_morphism(assemble_into_path(h))
    if assembled.ok != rep.ok:
        raise AssertionError(
            "homotopy checker disagreement: direct (H_m) route says "
            f"{rep.ok}, assembled-path route says {assembled.ok}")
    return rep


def solve_r_homotopy(f: TwistedMorphism, g: TwistedMorphism, r: int) \
        -> RHomotopy | None:
    """Find hhat with f ~_r g, or None when the linear system is insoluble."""
    if f.src != g.src or f.dst != g.dst:
        raise ValueError("f and g must share source and target")
    a, b = f.src, f.dst
    field = f.field
    sys = BlockLinearSystem(field)
    # variables: blocks of hhat_m at source bidegree (i,j)
    hvars = []
    supp_a = a.module.support()
    supp_b = set(b.module.support())
    i_min_b = min((i for (i, _) in supp_b), default=0)
    i_max_a = max((i for (i, _) in supp_a), default=0)
    m_hi = r + i_max_a - i_min_b
    for m in range(0, max(0, m_hi) + 1):
        for (i, j) in supp_a:
            tgt = (i - m + r, j - m + r - 1)
            if tgt in supp_b:
                key = ("h", m, i, j)
                sys.variable(key, b.module.dims[tgt], a.module.dims[(i, j)])
                hvars.append((m, (i, j)))
    # equations: (H_m) blocks
    d_keys_b = sorted(b.d)
    d_keys_a = sorted(a.d)
    m_eq_hi = m_hi + max(d_keys_a + d_keys_b, default=0) \
        + r + max(set(f.f) | set(g.f), default=0) + 1
    for m in range(0, m_eq_hi + 1):
        for (i, j) in supp_a:
            tgt = (i - m + r, j - m + r)
            if tgt not in supp_b:
                continue
            eq = ("H", m, i, j)
            rows = b.module.dims[tgt]
            cols = a.module.dims[(i, j)]
            sys.equation(eq, rows, cols)
            for di in d_keys_b:
                jm = m - di
                vk = ("h", jm, i, j)
                if jm >= 0 and vk in sys._vars:
                    blk = b.d[di].blocks.get((i - jm + r, j - jm + r - 1))
                    if blk is not None:
                        sys.add_term(eq, vk, blk, None,
                                     1 if (di + r) % 2 == 0 else -1)
            for dj in d_keys_a:
                hi = m - dj
                if hi < 0:
                    continue
                dblk = a.d[dj].blocks.get((i, j))
                if dblk is None:
                    continue
                vk = ("h", hi, i - dj, j - dj + 1)
                if vk in sys._vars:
                    sys.add_term(eq, vk, None, dblk,
                                 1 if hi % 2 == 0 else -1)
            if m >= r:
                diff = g.f_map(m - r) - f.f_map(m - r)
                blk = diff.blocks.get((i, j))
                if blk is not None:
                    sys.add_rhs(eq, blk)
    sol = sys.solve()
    if sol is None:
        return None
    per_m: dict[int, dict] = {}
    for (m, (i, j)) in hvars:
        blk = sol[("h", m, i, j)]
        if not blk.is_zero():
            per_m.setdefault(m, {})[(i, j)] = blk
    h = {m: BigradedMap(a.module, b.module, (-m + r, -m + r - 1), blocks)
         for m, blocks in per_m.items()}
    out = RHomotopy(r, f, g, h)
    check_r_homotopy(out).raise_if_failed()
    return out


def shift_homotopy(h: RHomotopy) -> RHomotopy:
    """An (r+1)-homotopy from the same f to g: hhat'_0 = 0, hhat'_m = -hhat_{m-1}.

    Reindexing m -> m-1 flips the parity of every sign in (H_m), so the
    bare index shift witnesses g ~ f; negating the family keeps the
    direction f ~ g.
    """
    check_r_homotopy(h).raise_if_failed()
    out = RHomotopy(h.r + 1, h.f, h.g, {m + 1: -hm for m, hm in h.h.items()})
    check_r_homotopy(out).raise_if_failed()
    return out


def negate_homotopy(h: RHomotopy) -> RHomotopy:
    """Witness for the symmetric relation g ~_r f."""
    return RHomotopy(h.r, h.g, h.f, {m: -hm for m, hm in h.h.items()})


def add_homotopies(h1: RHomotopy, h2: RHomotopy) -> RHomotopy:
    """Transitivity witness: f ~ f' and f' ~ f'' give hhat + hhat'."""
    if h1.g != h2.f or h1.r != h2.r:
        raise ValueError("homotopies are not composable")
    keys = set(h1.h) | set(h2.h)
    return RHomotopy(h1.r, h1.f, h2.g,
                     {m: h1.h_map(m) + h2.h_map(m) for m in keys})


# ---------------------------------------------------------------------------
# cones vs homotopies (Lemma-level translation)
# ---------------------------------------------------------------------------

def cone_to_pair(tau: TwistedMorphism, cone_obj: ConeObject):
    """From tau: C_r(w) -> X recover (f, h) with f = tau o incl and
    h: 0 ~_r f o w given by hhat_m(a) = (-1)^m tau_m(a, 0)."""
    check_morphism(tau).raise_if_failed()
    if tau.src != cone_obj.complex:
        raise ValueError("tau does not start at the given cone")
    w, r = cone_obj.w, cone_obj.r
    a, b = w.src, w.dst
    x_cx = tau.dst
    shift = (r, r - 1)
    into_ta = shift_into(a.module, shift)  # A -> T_r(A) part of the cone
    _, (inc_a, inc_b), _ = direct_sum([a.module.shifted(shift), b.module])
    f = TwistedMorphism(b, x_cx,
                        {m: bcompose(tm, inc_b) for m, tm in tau.f.items()})
    check_morphism(f).raise_if_failed()
    hmaps = {}
    for m, tm in tau.f.items():
        hm = bcompose(tm, bcompose(inc_a, into_ta))
        if m % 2:
            hm = -hm
        if not hm.is_zero():
            hmaps[m] = hm
    h = RHomotopy(r, zero_morphism(a, x_cx), compose(f, w), hmaps)
    check_r_homotopy(h).raise_if_failed()
    return f, h


def pair_to_cone(f: TwistedMorphism, h: RHomotopy,
                 cone_obj: ConeObject) -> TwistedMorphism:
    """tau_m(a, b) = (-1)^m hhat_m(a) + f_m(b)."""
    w, r = cone_obj.w, cone_obj.r
    if h.f != zero_morphism(w.src, f.dst) or h.g != compose(f, w, check=False):
        raise ValueError("h must witness 0 ~_r f o w")
    check_r_homotopy(h).raise_if_failed()
    a, b = w.src, w.dst
    shift = (r, r - 1)
    out_ta = shift_out(a.module, shift)
    _, _, (pr_a, pr_b) = direct_sum([a.module.shifted(shift), b.module])
    comps = {}
    for m in sorted(set(h.h) | set(f.f)):
        c = zero_map(cone_obj.complex.module, f.dst.module, (-m, -m))
        if m in h.h:
            t = bcompose(h.h[m], bcompose(out_ta, pr_a))
            c = c + (t if m % 2 == 0 else -t)
        if m in f.f:
            c = c + bcompose(f.f[m], pr_b)
        if not c.is_zero():
            comps[m] = c
    tau = TwistedMorphism(cone_obj.complex, f.dst, comps)
    check_morphism(tau).raise_if_failed()
    return tau
